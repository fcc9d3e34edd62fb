import json
import os
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from core.data_contracts import DataLoadError, FlowLineFamily, GridError, SolveReport
from core.spectral_core import BracketField, make_grid, theta_nodes
from managers.config_manager import SolveConfig
from utils.constants import FORMAT_VERSION
from utils.utils import to_json, write_text

SOLUTION_KEYS = ["format_version", "R", "p", "grid", "h_modes", "numerics"]


def _float_or_inf(value: Any) -> float:
    return float("inf") if value is None else float(value)


@dataclass
class SolutionRecord:
    """A SolutionFile as loaded back from disk."""

    solution: FlowLineFamily
    numerics: SolveConfig
    converged: bool = True
    residual: Dict[str, float] = field(default_factory=dict)
    problem: Optional[Dict[str, Any]] = None
    analyticity_width_of_trace: float = float("inf")


def solution_document(report: SolveReport, numerics: SolveConfig, problem: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Everything needed to reproduce the solve: the full smooth factor h plus derived views of it."""
    sol = report.solution
    a = sol.a
    grid = a.grid
    interior, boundary, cokernel = report.residual_history[-1] if report.residual_history else (None, None, None)
    remainder = grid.nodes[None, :] * (a.physical() - a.physical()[:, :1]).real
    return {
        "format_version": FORMAT_VERSION,
        "converged": report.converged,
        "message": report.message,
        "R": sol.R,
        "p": [sol.p[0], sol.p[1]],
        "grid": {
            "K": a.K,
            "N": grid.N,
            "s_nodes": grid.nodes,
            "theta_nodes": theta_nodes(a.K),
        },
        "h_modes": {"re": a.h.real, "im": a.h.imag},
        "leading": {"k": a.wavenumbers, "re": a.h[:, 0].real, "im": a.h[:, 0].imag},
        "remainder": remainder,
        "residual": {"interior": interior, "boundary": boundary, "cokernel": cokernel},
        "iterations": report.iterations,
        "residual_history": [list(entry) for entry in report.residual_history],
        "contraction_ratios": report.contraction_ratios,
        "analyticity_width_of_trace": report.analyticity_width_of_trace,
        "norms": {"j_norm": report.j_norm, "r_distance": report.r_distance, "p_norm": report.p_norm},
        "continuation": report.continuation,
        "problem": problem,
        "numerics": numerics.to_dict(),
    }


class SolutionManager:
    """Saves and loads SolutionFile documents."""

    def __init__(self, solution_path: str):
        self.solution_path = solution_path
        self.logger = logging.getLogger(__name__)

    def save(self, report: SolveReport, numerics: SolveConfig, problem: Optional[Dict[str, Any]] = None) -> None:
        """Writes the solution with 17-digit floats so that a reload is bit-exact."""
        write_text(self.solution_path, to_json(solution_document(report, numerics, problem)) + "\n")
        self.logger.info(f"Solution saved to: {self.solution_path}")

    def load(self) -> SolutionRecord:
        """
        Loads a SolutionFile.
        Raises:
            DataLoadError: If the file is missing, is invalid JSON or has inconsistent shapes.
        """
        if not os.path.exists(self.solution_path):
            self.logger.critical(f"Solution file not found: {self.solution_path}")
            raise DataLoadError(f"Solution file missing: {self.solution_path}")

        try:
            with open(self.solution_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            self.logger.critical(f"Invalid JSON in solution file: {e}")
            raise DataLoadError(f"{self.solution_path}: line {e.lineno}, column {e.colno}: {e.msg}") from e

        if not isinstance(data, dict):
            raise DataLoadError(f"{self.solution_path}: expected an object")
        for key in SOLUTION_KEYS:
            if key not in data:
                self.logger.critical(f"Missing essential key in solution file: {key}")
                raise DataLoadError(f"solution: missing required key '{key}'")
        if data["format_version"] != FORMAT_VERSION:
            raise DataLoadError(f"solution.format_version: unsupported version {data['format_version']!r}")

        try:
            K, N = int(data["grid"]["K"]), int(data["grid"]["N"])
            h = np.asarray(data["h_modes"]["re"], dtype=float) + 1j * np.asarray(data["h_modes"]["im"], dtype=float)
            if h.shape != (2 * K + 1, N):
                raise DataLoadError(f"solution.h_modes: expected shape {(2 * K + 1, N)}, got {h.shape}")
            a = BracketField(0.5, h, make_grid(N))
            family = FlowLineFamily(float(data["R"]), (float(data["p"][0]), float(data["p"][1])), a)
            numerics = SolveConfig.from_dict(data["numerics"], location="solution.numerics")
        except (KeyError, TypeError, ValueError, IndexError, GridError) as e:
            self.logger.critical(f"Malformed solution file: {e}")
            raise DataLoadError(f"solution: malformed content ({e})") from e
        residual = {k: _float_or_inf(v) for k, v in (data.get("residual") or {}).items()}
        self.logger.info(f"Loaded solution from {self.solution_path}")
        return SolutionRecord(
            solution=family,
            numerics=numerics,
            converged=bool(data.get("converged", True)),
            residual=residual,
            problem=data.get("problem"),
            analyticity_width_of_trace=_float_or_inf(data.get("analyticity_width_of_trace")),
        )


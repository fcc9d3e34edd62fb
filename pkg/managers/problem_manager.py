import json
import os
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from numpy.polynomial import chebyshev, polynomial

from core.data_contracts import DataLoadError
from core.field_ops import BoundaryCurve, translated_disk_boundary
from core.spectral_core import SGrid, SGridFunction, ThetaSeries
from managers.config_manager import SolveConfig
from utils.constants import (
    BOUNDARY_TRANSLATED_DISK,
    DEFAULT_TAU,
    FORMAT_VERSION,
    VORTICITY_CONSTANT,
    VORTICITY_POLYNOMIAL,
    VORTICITY_SAMPLES,
)

PROBLEM_KEYS = {"format_version", "vorticity", "boundary", "numerics", "outputs"}
VORTICITY_KEYS = {
    VORTICITY_CONSTANT: {"type", "value"},
    VORTICITY_SAMPLES: {"type", "s_values", "F_values"},
    VORTICITY_POLYNOMIAL: {"type", "coefficients"},
}
FOURIER_BOUNDARY_KEYS = {"fourier_cos", "fourier_sin", "tau"}
TRANSLATED_BOUNDARY_KEYS = {"type", "eps", "tau"}

OUTPUT_SOLUTION = "solution"
OUTPUT_FLOWLINES = "flowlines"
OUTPUT_STREAM = "stream"
OUTPUT_REPORT = "report"
OUTPUT_KINDS = [OUTPUT_SOLUTION, OUTPUT_FLOWLINES, OUTPUT_STREAM, OUTPUT_REPORT]


def _reject_unknown(data: Any, allowed: set, location: str) -> None:
    if not isinstance(data, dict):
        raise DataLoadError(f"{location}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise DataLoadError(f"{location}: unknown key(s) {unknown}")


def _require(data: Dict[str, Any], key: str, location: str) -> Any:
    if key not in data:
        raise DataLoadError(f"{location}: missing required key '{key}'")
    return data[key]


def _number_list(value: Any, location: str) -> List[float]:
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise DataLoadError(f"{location}: expected a list of numbers")
    return [float(v) for v in value]


def _number(value: Any, location: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise DataLoadError(f"{location}: expected a number, got {value!r}")
    return float(value)


@dataclass
class ProblemFile:
    """A parsed problem document: vorticity F(psi), boundary b(phi), numerics and requested outputs."""

    vorticity: Dict[str, Any]
    boundary: Dict[str, Any]
    numerics: SolveConfig = field(default_factory=SolveConfig)
    outputs: List[str] = field(default_factory=lambda: [OUTPUT_SOLUTION])
    vorticity_shift: float = 0.0
    boundary_scale: float = 1.0

    @classmethod
    def from_dict(cls, data: Any) -> "ProblemFile":
        """Validate a problem document.

        Raises:
            DataLoadError: For unknown keys, missing keys or wrongly typed values (with a dotted location).
            ConfigError: If the numerics violate a hard constraint.
        """
        _reject_unknown(data, PROBLEM_KEYS, "problem")
        version = data.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise DataLoadError(f"problem.format_version: unsupported version {version!r}")

        vorticity = _require(data, "vorticity", "problem")
        if not isinstance(vorticity, dict):
            raise DataLoadError("problem.vorticity: expected an object")
        kind = vorticity.get("type")
        if kind not in VORTICITY_KEYS:
            raise DataLoadError(f"problem.vorticity.type: expected one of {sorted(VORTICITY_KEYS)}, got {kind!r}")
        _reject_unknown(vorticity, VORTICITY_KEYS[kind], "problem.vorticity")
        if kind == VORTICITY_CONSTANT:
            _number(_require(vorticity, "value", "problem.vorticity"), "problem.vorticity.value")
        elif kind == VORTICITY_SAMPLES:
            s = _number_list(_require(vorticity, "s_values", "problem.vorticity"), "problem.vorticity.s_values")
            F = _number_list(_require(vorticity, "F_values", "problem.vorticity"), "problem.vorticity.F_values")
            if len(s) != len(F) or len(s) < 2:
                raise DataLoadError("problem.vorticity: s_values and F_values need equal length >= 2")
            if min(s) < 0.0 or max(s) > 1.0 or len(set(s)) != len(s):
                raise DataLoadError("problem.vorticity.s_values: values must be distinct and lie in [0, 1]")
        else:
            coeffs = _number_list(_require(vorticity, "coefficients", "problem.vorticity"),
                                  "problem.vorticity.coefficients")
            if not coeffs:
                raise DataLoadError("problem.vorticity.coefficients: at least one coefficient required")

        boundary = _require(data, "boundary", "problem")
        if isinstance(boundary, dict) and boundary.get("type") == BOUNDARY_TRANSLATED_DISK:
            _reject_unknown(boundary, TRANSLATED_BOUNDARY_KEYS, "problem.boundary")
            eps = _number(_require(boundary, "eps", "problem.boundary"), "problem.boundary.eps")
            if not 0.0 <= abs(eps) < 1.0:
                raise DataLoadError(f"problem.boundary.eps: |eps| must be < 1, got {eps}")
        else:
            _reject_unknown(boundary, FOURIER_BOUNDARY_KEYS, "problem.boundary")
            _number_list(_require(boundary, "fourier_cos", "problem.boundary"), "problem.boundary.fourier_cos")
            _number_list(boundary.get("fourier_sin", []), "problem.boundary.fourier_sin")
        if "tau" in boundary:
            _number(boundary["tau"], "problem.boundary.tau")

        numerics = SolveConfig.from_dict(data.get("numerics", {}), location="problem.numerics")

        outputs = data.get("outputs", [OUTPUT_SOLUTION])
        if not isinstance(outputs, list) or any(o not in OUTPUT_KINDS for o in outputs):
            raise DataLoadError(f"problem.outputs: expected a list drawn from {OUTPUT_KINDS}, got {outputs!r}")

        return cls(vorticity=vorticity, boundary=boundary, numerics=numerics, outputs=list(outputs))

    def to_dict(self) -> Dict[str, Any]:
        """Echo of the problem as solved; sweep offsets are folded into the data."""
        vorticity = dict(self.vorticity)
        if self.vorticity_shift != 0.0:
            vorticity = self._shifted_vorticity()
        boundary = dict(self.boundary)
        if self.boundary_scale != 1.0:
            boundary = self._scaled_boundary()
        return {
            "format_version": FORMAT_VERSION,
            "vorticity": vorticity,
            "boundary": boundary,
            "numerics": self.numerics.to_dict(),
            "outputs": list(self.outputs),
        }

    def _shifted_vorticity(self) -> Dict[str, Any]:
        v = dict(self.vorticity)
        if v["type"] == VORTICITY_CONSTANT:
            v["value"] = float(v["value"]) + self.vorticity_shift
        elif v["type"] == VORTICITY_SAMPLES:
            v["F_values"] = [float(x) + self.vorticity_shift for x in v["F_values"]]
        else:
            coeffs = [float(c) for c in v["coefficients"]]
            coeffs[0] += self.vorticity_shift
            v["coefficients"] = coeffs
        return v

    def _scaled_boundary(self) -> Dict[str, Any]:
        if self.boundary.get("type") == BOUNDARY_TRANSLATED_DISK:
            # No closed form for a scaled translated disk; store its Fourier form
            series = self.boundary_curve().b
            K = series.K
            cos = [series.coeffs[K].real] + [2.0 * series.coeffs[K + n].real for n in range(1, K + 1)]
            sin = [0.0] + [-2.0 * series.coeffs[K + n].imag for n in range(1, K + 1)]
            return {"fourier_cos": cos, "fourier_sin": sin, "tau": self.tau}
        b = dict(self.boundary)
        b["fourier_cos"] = [float(c) * self.boundary_scale for c in b["fourier_cos"]]
        b["fourier_sin"] = [float(c) * self.boundary_scale for c in b.get("fourier_sin", [])]
        return b

    @property
    def tau(self) -> float:
        return float(self.boundary.get("tau", DEFAULT_TAU))

    def vorticity_profile(self, grid: SGrid) -> SGridFunction:
        """F sampled at the s-grid nodes (psi = s^2)."""
        v = self.vorticity
        s = grid.nodes
        if v["type"] == VORTICITY_CONSTANT:
            values = np.full(grid.N, float(v["value"]))
        elif v["type"] == VORTICITY_SAMPLES:
            s_in = np.asarray(v["s_values"], dtype=float)
            degree = min(s_in.size - 1, grid.N - 1)
            coeffs = chebyshev.chebfit(2.0 * s_in - 1.0, np.asarray(v["F_values"], dtype=float), degree)
            values = chebyshev.chebval(2.0 * s - 1.0, coeffs)
        else:
            values = polynomial.polyval(s**2, np.asarray(v["coefficients"], dtype=float))
        return SGridFunction(values + self.vorticity_shift, grid)

    def boundary_curve(self) -> BoundaryCurve:
        """The boundary curve, scaled by boundary_scale.

        Raises:
            BoundaryError: If b(phi) is not positive.
        """
        b = self.boundary
        if b.get("type") == BOUNDARY_TRANSLATED_DISK:
            curve = translated_disk_boundary(float(b["eps"]), K=self.numerics.K, tau=self.tau)
        else:
            curve = BoundaryCurve(ThetaSeries.from_cos_sin(b["fourier_cos"], b.get("fourier_sin")), self.tau)
        return curve.scaled(self.boundary_scale) if self.boundary_scale != 1.0 else curve


class ProblemManager:
    """Loads problem documents from disk."""

    def __init__(self, problem_path: str):
        self.problem_path = problem_path
        self.problem: Optional[ProblemFile] = None
        self.logger = logging.getLogger(__name__)

    def load(self) -> ProblemFile:
        """
        Loads and validates the problem file.
        Raises:
            DataLoadError: If the file is missing, is invalid JSON or fails validation.
        """
        if not os.path.exists(self.problem_path):
            self.logger.critical(f"Problem file not found: {self.problem_path}")
            raise DataLoadError(f"Problem file missing: {self.problem_path}")

        try:
            with open(self.problem_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            self.logger.critical(f"Invalid JSON in problem file: {e}")
            raise DataLoadError(f"{self.problem_path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
        except OSError as e:
            self.logger.critical(f"Failed to read problem file: {e}")
            raise DataLoadError(f"Failed to read problem file: {e}") from e

        self.problem = ProblemFile.from_dict(data)
        self.logger.info(f"Loaded problem from {self.problem_path}")
        return self.problem

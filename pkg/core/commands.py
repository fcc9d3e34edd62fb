"""
Subcommand bodies of the stagcalc command line.

Each cmd_* function returns an exit status: 0 success, 1 input error, 2 numerical failure.
"""

import dataclasses
import logging
import os
import sys
from typing import Any, Dict, List, Optional, TextIO, Tuple

from core.data_contracts import (
    INPUT_ERRORS,
    NUMERICAL_ERRORS,
    ConfigError,
    ConvergenceError,
    FlowLineFamily,
    GridError,
    SolveReport,
    UndefinedWidthError,
)
from core.diagnostics import get_suites
from core.diagnostics.checks import strip_margin_report
from core.solver import continuation_solve, flow_line, stream_grid
from core.spectral_core import make_grid
from managers.config_manager import ConfigManager, SolveConfig
from managers.problem_manager import (
    OUTPUT_FLOWLINES,
    OUTPUT_REPORT,
    OUTPUT_STREAM,
    ProblemFile,
    ProblemManager,
)
from managers.solution_manager import SolutionManager
from utils.constants import (
    DEFAULT_LEVELS,
    DEFAULT_STREAM_RESOLUTION,
    EXIT_INPUT_ERROR,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    FORMAT_VERSION,
    MAX_STREAM_RESOLUTION,
    OUTPUT_CSV,
    OUTPUT_JSON,
    OUTSIDE_SENTINEL,
    SWEEP_SCALE,
    SWEEP_VORTICITY_SHIFT,
)
from utils.utils import csv_text, to_json, write_text

logger = logging.getLogger(__name__)


def exit_code_for(error: Exception) -> int:
    if isinstance(error, INPUT_ERRORS + (UndefinedWidthError,)):
        return EXIT_INPUT_ERROR
    if isinstance(error, NUMERICAL_ERRORS):
        return EXIT_NONCONVERGENCE
    raise error


def _load_problem(problem_path: str, config_path: Optional[str] = None) -> ProblemFile:
    problem = ProblemManager(problem_path).load()
    if config_path:
        manager = ConfigManager(config_path)
        if not manager.load():
            raise ConfigError(f"Config file not found: {config_path}")
        problem.numerics = manager.get_config()
    return problem


def solve_problem(problem: ProblemFile) -> Tuple[Optional[SolveReport], int]:
    """Run the continuation solve; a failed solve still returns its partial report when there is one."""
    cfg = problem.numerics
    F = problem.vorticity_profile(make_grid(cfg.N))
    b = problem.boundary_curve()
    try:
        return continuation_solve(F, b, cfg), EXIT_OK
    except ConvergenceError as e:
        logger.error(f"Solve did not converge: {e}")
        return e.report, EXIT_NONCONVERGENCE


def _report_document(report: SolveReport, problem: ProblemFile) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "converged": report.converged,
        "message": report.message,
        "iterations": report.iterations,
        "tolerance": report.tolerance,
        "residual_history": [list(entry) for entry in report.residual_history],
        "contraction_ratios": report.contraction_ratios,
        "continuation": report.continuation,
        "analyticity_width_of_trace": report.analyticity_width_of_trace,
        "norms": {"j_norm": report.j_norm, "r_distance": report.r_distance, "p_norm": report.p_norm},
    }
    try:
        doc["strip_margin"] = strip_margin_report(report.solution, problem.boundary_curve(), problem.numerics).to_dict()
    except NUMERICAL_ERRORS as e:
        logger.warning(f"Strip margin not available: {e}")
    return doc


def _flowline_rows(solution: FlowLineFamily, levels: List[float]) -> List[List[float]]:
    rows = []
    for level in levels:
        theta, x, y = flow_line(solution, level)
        rows.extend([level, t, x_j, y_j] for t, x_j, y_j in zip(theta, x, y))
    return rows


def _stream_text(solution: FlowLineFamily, nx: int, ny: int, fmt: str) -> str:
    if not (2 <= nx <= MAX_STREAM_RESOLUTION and 2 <= ny <= MAX_STREAM_RESOLUTION):
        raise GridError(f"Stream resolution must lie in [2, {MAX_STREAM_RESOLUTION}], got {nx} x {ny}")
    xs, ys, psi, outside = stream_grid(solution, nx, ny)
    count = int(outside.sum())
    logger.info(f"Stream grid {nx} x {ny}: {count} points outside the domain")
    if fmt == OUTPUT_CSV:
        rows = [[xs[i], ys[j], psi[j, i], int(outside[j, i])] for j in range(ny) for i in range(nx)]
        return csv_text(["x", "y", "psi", "outside"], rows)
    return to_json({
        "format_version": FORMAT_VERSION,
        "nx": nx,
        "ny": ny,
        "x": xs,
        "y": ys,
        "psi": psi,
        "outside_sentinel": OUTSIDE_SENTINEL,
        "outside_count": count,
    }) + "\n"


def cmd_solve(problem_path: str, out_path: str, config_path: Optional[str] = None) -> int:
    """Solve a problem file and write the SolutionFile plus any extra outputs it requests."""
    try:
        problem = _load_problem(problem_path, config_path)
        report, code = solve_problem(problem)
        if report is None:
            return code
        SolutionManager(out_path).save(report, problem.numerics, problem.to_dict())

        base = os.path.splitext(out_path)[0]
        if OUTPUT_FLOWLINES in problem.outputs:
            write_text(f"{base}.flowlines.csv",
                       csv_text(["level", "theta", "x", "y"], _flowline_rows(report.solution, DEFAULT_LEVELS)))
        if OUTPUT_STREAM in problem.outputs:
            write_text(f"{base}.stream.json",
                       _stream_text(report.solution, DEFAULT_STREAM_RESOLUTION, DEFAULT_STREAM_RESOLUTION, OUTPUT_JSON))
        if OUTPUT_REPORT in problem.outputs:
            write_text(f"{base}.report.json", to_json(_report_document(report, problem)) + "\n")
        return code
    except (INPUT_ERRORS + NUMERICAL_ERRORS + (UndefinedWidthError,)) as e:
        logger.error(f"solve failed: {e}")
        return exit_code_for(e)


def cmd_flowlines(solution_path: str, levels: List[float], out_path: str) -> int:
    """CSV of the flow lines psi = level: columns level, theta, x, y with 2K+1 rows per level."""
    try:
        for level in levels:
            if not 0.0 < level <= 1.0:
                raise GridError(f"--levels: each level must lie in (0, 1], got {level}")
        record = SolutionManager(solution_path).load()
        write_text(out_path, csv_text(["level", "theta", "x", "y"], _flowline_rows(record.solution, levels)))
        logger.info(f"Wrote {len(levels)} flow lines to {out_path}")
        return EXIT_OK
    except INPUT_ERRORS as e:
        logger.error(f"flowlines failed: {e}")
        return EXIT_INPUT_ERROR


def cmd_stream(solution_path: str, nx: int, ny: int, out_path: str, fmt: str = OUTPUT_JSON) -> int:
    """psi(x, y) on a Cartesian grid; points outside the domain carry the sentinel."""
    try:
        record = SolutionManager(solution_path).load()
        write_text(out_path, _stream_text(record.solution, nx, ny, fmt))
        return EXIT_OK
    except INPUT_ERRORS as e:
        logger.error(f"stream failed: {e}")
        return EXIT_INPUT_ERROR


def cmd_verify(
    suite: str,
    seed: int,
    fmt: str = OUTPUT_JSON,
    trials: Optional[int] = None,
    config_path: Optional[str] = None,
    stream: Optional[TextIO] = None,
) -> int:
    """Run a property suite and print its reports; exit 0 iff every report passes."""
    stream = stream or sys.stdout
    suites = get_suites(suite)
    if suites is None:
        logger.error(f"Unknown suite: '{suite}'")
        return EXIT_INPUT_ERROR
    try:
        cfg = SolveConfig(seed=seed)
        if config_path:
            manager = ConfigManager(config_path)
            if not manager.load():
                logger.error(f"verify failed: config file not found: {config_path}")
                return EXIT_INPUT_ERROR
            cfg = manager.get_config()
        reports = [r for s in suites for r in s.run(cfg, seed, trials)]
    except INPUT_ERRORS as e:
        logger.error(f"verify failed: {e}")
        return EXIT_INPUT_ERROR

    if fmt == OUTPUT_CSV:
        rows = [[r.name, r.seed, r.samples, r.worst_ratio, r.bound, "true" if r.passed else "false"] for r in reports]
        stream.write(csv_text(["name", "seed", "samples", "worst_ratio", "bound", "pass"], rows))
    else:
        stream.write(to_json({"format_version": FORMAT_VERSION, "seed": seed,
                              "reports": [r.to_dict() for r in reports]}) + "\n")
    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.warning(f"Failed checks: {failed}")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _sweep_variant(problem: ProblemFile, param: str, value: float) -> ProblemFile:
    if param == SWEEP_SCALE:
        return dataclasses.replace(problem, boundary_scale=value)
    if param == SWEEP_VORTICITY_SHIFT:
        return dataclasses.replace(problem, vorticity_shift=value)
    field_type = {f.name: f.type for f in dataclasses.fields(SolveConfig)}[param]
    cast = int if field_type in (int, "int") else float
    return dataclasses.replace(problem, numerics=problem.numerics.replace(**{param: cast(value)}))


SWEEP_COLUMNS = ["value", "status", "exit_code", "iterations", "R", "p_x", "p_y", "interior", "boundary"]


def cmd_sweep(problem_path: str, param: str, values: List[float], out_path: str, fmt: str = OUTPUT_CSV) -> int:
    """Re-solve a problem for each value of one parameter; the exit status is the worst row's."""
    numeric_fields = [f.name for f in dataclasses.fields(SolveConfig)
                      if f.type in (int, float, "int", "float") and f.name != "seed"]
    if param not in numeric_fields + [SWEEP_SCALE, SWEEP_VORTICITY_SHIFT]:
        logger.error(f"Unknown sweep parameter: '{param}'")
        return EXIT_INPUT_ERROR
    try:
        problem = _load_problem(problem_path)
    except INPUT_ERRORS as e:
        logger.error(f"sweep failed: {e}")
        return EXIT_INPUT_ERROR

    rows = []
    worst = EXIT_OK
    for value in values:
        row: Dict[str, Any] = dict.fromkeys(SWEEP_COLUMNS)
        row["value"] = value
        try:
            report, code = solve_problem(_sweep_variant(problem, param, value))
        except (INPUT_ERRORS + NUMERICAL_ERRORS + (UndefinedWidthError,)) as e:
            logger.error(f"sweep {param}={value}: {e}")
            report, code = None, exit_code_for(e)
        row["exit_code"] = code
        row["status"] = {EXIT_OK: "converged", EXIT_INPUT_ERROR: "input-error"}.get(code, "failed")
        if report is not None:
            last = report.residual_history[-1]
            row.update(iterations=report.iterations, R=report.solution.R, p_x=report.solution.p[0],
                       p_y=report.solution.p[1], interior=last[0], boundary=last[1])
        logger.info(f"sweep {param}={value}: {row['status']}")
        rows.append(row)
        worst = max(worst, code)

    if fmt == OUTPUT_JSON:
        write_text(out_path, to_json({"format_version": FORMAT_VERSION, "param": param, "rows": rows}) + "\n")
    else:
        write_text(out_path, csv_text(SWEEP_COLUMNS, [["" if row[c] is None else row[c] for c in SWEEP_COLUMNS]
                                                      for row in rows]))
    return worst

"""
Nonlinear Solver Module

Damped quasi-Newton iteration for Xi(a) = F, B(b, R, p, a) = 0 using the frozen
reference inverse (or a finite-difference Jacobian), parameter continuation from the
rigid rotation, the R = 1 compatibility root-find and stream-function reconstruction.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import root_scalar

from core.data_contracts import (
    ConfigError,
    ConvergenceError,
    DegeneracyError,
    FlowLineFamily,
    GridError,
    IncompatibilityRangeError,
    Increment,
    MonotonicityError,
    ResidualPair,
    SolveReport,
    WindingError,
)
from core.field_ops import BoundaryCurve, boundary_op, phi_angle, strip_excursion, trace_width, xi
from core.spectral_core import (
    BracketField,
    SGrid,
    SGridFunction,
    ThetaSeries,
    j_norm,
    make_grid,
    theta_nodes,
)
from core.stepping import get_step_method
from core.stepping.base import StepContext
from managers.config_manager import SolveConfig
from utils.constants import (
    AMPLITUDE_FLOOR,
    COMPAT_RANGE_TOL,
    COMPAT_SCALE_MAX,
    COMPAT_SCALE_MIN,
    COMPAT_X0,
    COMPAT_X1,
    MAX_NORM_ORDER,
    OUTSIDE_SENTINEL,
    REFERENCE_VORTICITY,
    ROUNDOFF_FLOOR_FACTOR,
    STEP_GROWTH_LIMIT,
    STEP_WINDOW,
    STREAM_BISECTION_STEPS,
)

logger = logging.getLogger(__name__)

Profile = Union[SGridFunction, Callable[[np.ndarray], np.ndarray], np.ndarray, float]


def reference_family(K: int, grid: SGrid) -> FlowLineFamily:
    """(R, p, a) = (1, 0, psi^{1/2}): rigid rotation in the unit disk."""
    return FlowLineFamily(1.0, (0.0, 0.0), BracketField.reference(K, grid))


def vorticity_on_grid(profile: Profile, grid: SGrid) -> SGridFunction:
    """Reduce F(psi) to samples on the s-grid.

    Accepts grid samples, a constant, or a callable evaluated at psi = s^2.
    """
    if isinstance(profile, SGridFunction):
        if profile.grid.N != grid.N:
            raise GridError(f"Vorticity sampled on N={profile.grid.N}, solver grid has N={grid.N}")
        return profile
    if callable(profile):
        values = np.asarray(profile(grid.nodes**2), dtype=float)
    else:
        values = np.asarray(profile, dtype=float)
    if values.ndim == 0:
        values = np.full(grid.N, float(values))
    return SGridFunction(values, grid)


def residual(F: SGridFunction, b: BoundaryCurve, state: FlowLineFamily, cfg: SolveConfig) -> ResidualPair:
    """(Xi(a) - F, B(b, R, p, a)) with the e^{+-2i theta} part of the leading term projected out.

    The cokernel moments and the interior sup-norm are taken before the projection.
    """
    a = state.a
    field = xi(a, dealias=cfg.dealias, tol=cfg.degeneracy_tol)
    h = field.h.copy()
    h[a.K] -= F.values
    interior_sup = float(np.max(np.abs(BracketField(0.0, h, a.grid).physical())))

    # 2 pi (c_{-2}, c_2) are the moments against e^{+2i theta} and e^{-2i theta}
    moments = (2.0 * np.pi * complex(h[a.K - 2, 0]), 2.0 * np.pi * complex(h[a.K + 2, 0]))
    for idx in (a.K - 2, a.K + 2):
        h[idx] -= h[idx, 0]

    bdry = boundary_op(b, state.R, state.p, a)
    boundary_sup = float(np.max(np.abs(bdry.samples())))
    return ResidualPair(
        interior=BracketField(0.0, h, a.grid),
        boundary=bdry,
        cokernel_moments=moments,
        interior_sup=interior_sup,
        boundary_sup=boundary_sup,
    )


def apply_increment(state: FlowLineFamily, inc: Increment, damping: float) -> FlowLineFamily:
    """x - damping * delta, projected back onto real fields."""
    a = BracketField(state.a.lam, state.a.h - damping * inc.dh, state.a.grid).real_part()
    return FlowLineFamily(
        R=float(state.R - damping * inc.dR),
        p=(float(state.p[0] - damping * inc.dp[0]), float(state.p[1] - damping * inc.dp[1])),
        a=a,
    )


def _check_inputs(F: SGridFunction, b: BoundaryCurve, cfg: SolveConfig, init: Optional[FlowLineFamily]) -> None:
    if not b.tau > cfg.sigma:
        raise ConfigError(f"boundary tau = {b.tau} must exceed numerics.sigma = {cfg.sigma}")
    if F.grid.N != cfg.N:
        raise GridError(f"Vorticity sampled on N={F.grid.N}, config has N={cfg.N}")
    if init is not None and (init.a.K != cfg.K or init.a.grid.N != cfg.N):
        raise GridError(f"Initial guess has (K, N) = ({init.a.K}, {init.a.grid.N}), config has ({cfg.K}, {cfg.N})")


def _history_entry(res: ResidualPair) -> Tuple[float, float, float]:
    return (res.interior_sup, res.boundary_sup, res.cokernel_magnitude)


def _build_report(
    state: FlowLineFamily,
    iterations: int,
    history: List[Tuple[float, float, float]],
    ratios: List[float],
    b: BoundaryCurve,
    cfg: SolveConfig,
    converged: bool,
    message: str,
    tol: float,
) -> SolveReport:
    trace = ThetaSeries(state.a.trace().coeffs, real=True)
    width = trace_width(trace, floor=max(AMPLITUDE_FLOOR, 100.0 * tol))
    deviation = state.a - BracketField.reference(state.a.K, state.a.grid)
    try:
        excursion = strip_excursion(phi_angle(state.R, state.p, trace), cfg.sigma)
        if cfg.sigma + excursion > b.tau:
            logger.warning(f"Strip margin exceeded: sigma + excursion = {cfg.sigma + excursion:.4f} > tau = {b.tau}")
    except WindingError as e:
        logger.warning(f"Strip check skipped: {e}")
    return SolveReport(
        solution=state,
        iterations=iterations,
        converged=converged,
        residual_history=history,
        contraction_ratios=ratios,
        analyticity_width_of_trace=width,
        j_norm=j_norm(deviation, cfg.gamma, min(cfg.m, MAX_NORM_ORDER), cfg.sigma),
        r_distance=abs(state.R - 1.0),
        p_norm=math.hypot(*state.p),
        message=message,
        tolerance=tol,
    )


def roundoff_floor(N: int, scale: float = 1.0) -> float:
    """Smallest residual the collocation can resolve: second s-derivatives amplify eps by ~(N - 1)^4."""
    return ROUNDOFF_FLOOR_FACTOR * np.finfo(float).eps * (N - 1) ** 4 * max(1.0, scale)


def effective_tolerance(cfg: SolveConfig, state: FlowLineFamily) -> float:
    """tol_residual, raised to the roundoff floor of the grid when it sits below it."""
    floor = roundoff_floor(state.a.grid.N, float(np.max(np.abs(state.a.h))))
    if floor > cfg.tol_residual:
        logger.info(f"tol_residual {cfg.tol_residual:.1e} is below the roundoff floor; using {floor:.3e}")
    return max(cfg.tol_residual, floor)


def newton_solve(
    F: SGridFunction, b: BoundaryCurve, cfg: SolveConfig, init: Optional[FlowLineFamily] = None
) -> SolveReport:
    """Iterate x <- x - damping * delta until max(|Xi(a) - F|, |B|) drops below the tolerance.

    The tolerance is tol_residual or the roundoff floor of the grid, whichever is larger.
    The full step is taken whenever it stays admissible and does not raise the residual
    by more than STEP_GROWTH_LIMIT over the last STEP_WINDOW iterates; otherwise the
    damping is halved (up to max_halvings times) until the residual strictly decreases.

    Raises:
        ConvergenceError: After max_iter iterations or when no damped step decreases the residual.
        DegeneracyError: If the initial guess is degenerate.
        WindingError: If the initial boundary map does not wind once.
    """
    _check_inputs(F, b, cfg, init)
    strategy = get_step_method(cfg.jacobian_mode)
    if strategy is None:
        raise ConfigError(f"Unknown jacobian_mode: {cfg.jacobian_mode}")

    state = init if init is not None else reference_family(cfg.K, make_grid(cfg.N))
    context = StepContext(config=cfg, evaluate=lambda x: residual(F, b, x, cfg))
    res = context.evaluate(state)
    tol = effective_tolerance(cfg, state)
    history = [_history_entry(res)]
    ratios: List[float] = []
    iterations = 0
    logger.info(f"Newton start ({strategy.name()}): residual {res.measure:.3e}, tolerance {tol:.3e}")

    while res.measure >= tol:
        if iterations >= cfg.max_iter:
            message = f"No convergence after {cfg.max_iter} iterations (residual {res.measure:.3e})"
            logger.error(message)
            report = _build_report(state, iterations, history, ratios, b, cfg, False, message, tol)
            raise ConvergenceError(message, report)

        inc = strategy.compute(state, res, context)
        recent = max(max(entry[0], entry[1]) for entry in history[-STEP_WINDOW:])
        damping = cfg.damping
        for attempt in range(cfg.max_halvings + 1):
            try:
                candidate = apply_increment(state, inc, damping)
                candidate_res = context.evaluate(candidate)
                if candidate_res.measure < res.measure:
                    break
                if attempt == 0 and candidate_res.measure <= STEP_GROWTH_LIMIT * recent:
                    logger.debug(f"Full step raised the residual to {candidate_res.measure:.3e}; accepted")
                    break
                logger.warning(f"Step with damping {damping:g} did not decrease the residual; halving")
            except (DegeneracyError, WindingError) as e:
                logger.warning(f"Step with damping {damping:g} left the admissible set ({e}); halving")
            damping *= 0.5
        else:
            message = (f"Damped step failed after {cfg.max_halvings} halvings at iteration {iterations + 1} "
                       f"(residual {res.measure:.3e})")
            logger.error(message)
            report = _build_report(state, iterations, history, ratios, b, cfg, False, message, tol)
            raise ConvergenceError(message, report)

        ratios.append(candidate_res.measure / res.measure)
        state, res = candidate, candidate_res
        iterations += 1
        history.append(_history_entry(res))
        logger.info(f"Iteration {iterations}: interior {res.interior_sup:.3e}, boundary {res.boundary_sup:.3e}, "
                    f"cokernel {res.cokernel_magnitude:.3e}, damping {damping:g}")

    message = f"Converged in {iterations} iterations"
    logger.info(f"{message}: R = {state.R:.12g}, p = ({state.p[0]:.6g}, {state.p[1]:.6g})")
    return _build_report(state, iterations, history, ratios, b, cfg, True, message, tol)


def continuation_solve(
    F: SGridFunction, b: BoundaryCurve, cfg: SolveConfig, init: Optional[FlowLineFamily] = None
) -> SolveReport:
    """Follow (F_t, b_t) = ((1-t) 4 + t F, (1-t) 1 + t b) over continuation_steps equal steps.

    Raises:
        ConvergenceError: With the last successful t in the message and the per-step history attached.
    """
    _check_inputs(F, b, cfg, init)
    grid = F.grid
    state = init if init is not None else reference_family(cfg.K, grid)
    unit = ThetaSeries.constant(1.0, b.b.K)
    steps = cfg.continuation_steps
    history: List[Dict[str, float]] = []
    last_t = 0.0
    report = None

    for i in range(1, steps + 1):
        t = i / steps
        F_t = SGridFunction((1.0 - t) * REFERENCE_VORTICITY + t * F.values, grid)
        b_t = BoundaryCurve(unit * (1.0 - t) + b.b * t, b.tau)
        try:
            report = newton_solve(F_t, b_t, cfg, state)
        except ConvergenceError as e:
            message = f"Continuation failed at t = {t:.6g}; last successful t = {last_t:.6g}"
            logger.error(message)
            if e.report is not None:
                e.report.continuation = history
                e.report.message = message
            raise ConvergenceError(message, e.report) from e
        history.append({"t": t, "iterations": report.iterations, "residual": max(report.residual_history[-1][:2])})
        logger.info(f"Continuation step {i}/{steps} (t = {t:.6g}) took {report.iterations} iterations")
        state = report.solution
        last_t = t

    report.continuation = history
    return report


def manufactured_radial(profile: SGridFunction, K: int = 8, dealias: bool = False) -> Tuple[SGridFunction, float, BracketField]:
    """Exact radial solution a = s h0(s): returns (F = Xi(a), b = a(1), a).

    Raises:
        GridError: If h0(0) != 1.
        MonotonicityError: If s h0(s) is not strictly increasing, i.e. [psi^{1/2} a_psi] <= 0 somewhere.
    """
    grid = profile.grid
    h0 = np.asarray(profile.values, dtype=float)
    if abs(h0[0] - 1.0) > 1e-12:
        raise GridError(f"Radial profile must satisfy h0(0) = 1, got {h0[0]:.6g}")
    b2 = 0.5 * (h0 + grid.nodes * grid.derivative(h0))
    if np.min(b2) <= 0:
        raise MonotonicityError(f"s*h0(s) is not strictly increasing: min (h0 + s h0')/2 = {np.min(b2):.3e}")
    h = np.zeros((2 * K + 1, grid.N), dtype=complex)
    h[K] = h0
    a = BracketField(0.5, h, grid)
    F = SGridFunction(xi(a, dealias=dealias).h[K].real.copy(), grid)
    return F, float(h0[-1]), a


def compatibilize(F: SGridFunction, b: BoundaryCurve, cfg: SolveConfig) -> Tuple[float, SolveReport]:
    """Secant search for c > 0 with R(c b) = 1.

    Raises:
        IncompatibilityRangeError: If the root is not found within [0.5, 2].
    """
    reports: Dict[float, SolveReport] = {}
    wide = (0.5 * COMPAT_SCALE_MIN, 2.0 * COMPAT_SCALE_MAX)

    def radius_defect(c: float) -> float:
        if not wide[0] <= c <= wide[1]:
            raise IncompatibilityRangeError(f"Compatibility scale left [{COMPAT_SCALE_MIN}, {COMPAT_SCALE_MAX}]: c = {c:.6g}")
        report = continuation_solve(F, b.scaled(c), cfg)
        reports[c] = report
        logger.debug(f"compatibilize: c = {c:.12g}, R = {report.solution.R:.12g}")
        return report.solution.R - 1.0

    result = root_scalar(radius_defect, method="secant", x0=COMPAT_X0, x1=COMPAT_X1, xtol=1e-13)
    c = float(result.root)
    if not result.converged or not (COMPAT_SCALE_MIN - COMPAT_RANGE_TOL <= c <= COMPAT_SCALE_MAX + COMPAT_RANGE_TOL):
        raise IncompatibilityRangeError(f"No compatible scale in [{COMPAT_SCALE_MIN}, {COMPAT_SCALE_MAX}] (last c = {c:.6g})")
    report = reports.get(result.root) or continuation_solve(F, b.scaled(c), cfg)
    logger.info(f"Compatible scale c = {c:.12g} after {result.function_calls} solves")
    return c, report


# --- Stream function ---
def _polar_rows(sol: FlowLineFamily, theta: np.ndarray) -> np.ndarray:
    """h(s_j, theta_i) for every query angle, shape (P, N)."""
    a = sol.a
    E = np.exp(1j * np.outer(theta, a.wavenumbers))
    return (E @ a.h).real


def reconstruct_stream(sol: FlowLineFamily, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """psi at Cartesian points by bisection of R s h(s, theta) = r in s.

    Returns:
        (psi, outside) with psi = OUTSIDE_SENTINEL wherever outside is True.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    dx = np.broadcast_to(x, shape).ravel() - sol.p[0]
    dy = np.broadcast_to(y, shape).ravel() - sol.p[1]
    r = np.hypot(dx, dy)
    rows = _polar_rows(sol, np.arctan2(dy, dx))
    grid = sol.a.grid

    outside = r > sol.R * rows[:, -1] * (1.0 + 1e-12)
    target = r / sol.R
    lo = np.zeros(r.size)
    hi = np.ones(r.size)
    for _ in range(STREAM_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = mid * grid.evaluate(rows, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    s = 0.5 * (lo + hi)
    psi = np.where(outside, OUTSIDE_SENTINEL, s**2)
    return psi.reshape(shape), outside.reshape(shape)


def stream_grid(sol: FlowLineFamily, nx: int, ny: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """psi on an nx x ny grid over the bounding box of the domain.

    Returns:
        (xs, ys, psi, outside) with psi of shape (ny, nx).
    """
    if nx < 2 or ny < 2:
        raise GridError(f"Stream grid needs at least 2 points per axis, got {nx} x {ny}")
    t = np.real(sol.a.trace().samples())
    extent = sol.R * float(np.max(t))
    xs = np.linspace(sol.p[0] - extent, sol.p[0] + extent, nx)
    ys = np.linspace(sol.p[1] - extent, sol.p[1] + extent, ny)
    X, Y = np.meshgrid(xs, ys)
    psi, outside = reconstruct_stream(sol, X, Y)
    return xs, ys, psi, outside


def flow_line(sol: FlowLineFamily, level: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Points (theta_j, x_j, y_j) of the level set psi = level on the theta nodes."""
    if not 0.0 <= level <= 1.0:
        raise GridError(f"Flow-line level must lie in [0, 1], got {level}")
    a = sol.a
    theta = theta_nodes(a.K)
    s = math.sqrt(level)
    r = sol.R * s * sol.a.grid.evaluate(a.physical().real, np.full(theta.size, s))
    return theta, sol.p[0] + r * np.cos(theta), sol.p[1] + r * np.sin(theta)

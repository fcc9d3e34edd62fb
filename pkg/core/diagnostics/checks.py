"""
Property Checks Module

Randomized numerical checks of the estimates behind the linear theory: the Hardy
inequality for weighted averages, vanishing cokernel moments of the leading term,
boundedness of the explicit linear inverse and the per-mode branch constants,
plus the analyticity strip margin of a converged solution.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from core.data_contracts import ConfigError, FlowLineFamily, LinearData, LinearSolution, PropertyReport
from core.field_ops import BoundaryCurve, phi_angle, strip_excursion, trace_width, xi
from core.linear_solver import (
    apply_L,
    apply_Lk_minus_inverse,
    apply_Lk_plus_inverse,
    boundary_relation,
    solve_linear,
)
from core.spectral_core import (
    BracketField,
    SGridFunction,
    ThetaSeries,
    j_norm,
    kondratev_norm,
    make_grid,
    x_sigma_norm,
)
from managers.config_manager import SolveConfig
from utils.constants import (
    AMPLITUDE_FLOOR,
    BOUNDARY_RELATION_TOL,
    BRANCH_DEGREE,
    BRANCH_K,
    BRANCH_N,
    COKERNEL_BOUND,
    COKERNEL_K,
    COKERNEL_MODES,
    COKERNEL_N,
    DEFAULT_GAMMA,
    DEFAULT_SEED,
    HARDY_DEGREE,
    HARDY_SLACK,
    HARDY_TAYLOR_CUTOFF,
    ISOMORPHISM_BOUND,
    LINEAR_MODES,
    MAX_NORM_ORDER,
    QUADRATURE_POINTS,
    RANDOM_DECAY,
    RESONANCE_TOL,
    ROUNDTRIP_TOL,
)

logger = logging.getLogger(__name__)


# --- Hardy inequality ---
def _gauss_unit(n: int = QUADRATURE_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(n)
    return 0.5 * (1.0 + x), 0.5 * w


def _difference_quotient(f: Chebyshev, x: np.ndarray) -> np.ndarray:
    """(f(x) - f(0)) / x, by Taylor expansion below the cutoff."""
    f0 = f(0.0)
    d1, d2, d3 = (f.deriv(j)(0.0) / math.factorial(j) for j in (1, 2, 3))
    small = x < HARDY_TAYLOR_CUTOFF
    safe = np.where(small, 1.0, x)
    return np.where(small, d1 + d2 * x + d3 * x**2, (f(safe) - f0) / safe)


def _weighted_average(f: Chebyshev, alpha: float, y: np.ndarray) -> np.ndarray:
    """y^{alpha-1} int_0^y x^{-alpha} f (alpha < 1/2) or y^{alpha-1} int_y^1 x^{-alpha} f (alpha > 1/2)."""
    if alpha < 0.5:
        # x = y (1 + t) / 2 turns x^{-alpha} into a Jacobi weight
        t, w = roots_jacobi(QUADRATURE_POINTS, 0.0, -alpha)
        x = 0.5 * y[:, None] * (1.0 + t[None, :])
        return 2.0 ** (alpha - 1.0) * (f(x) @ w)

    if abs(alpha - 1.0) < 1e-14:
        constant_part = -np.log(y)
    else:
        constant_part = (1.0 - y ** (1.0 - alpha)) / (1.0 - alpha)
    # f = f(0) + x g(x); with x = xi^4 the g-part is 4 int_z^1 xi^{7 - 4 alpha} g(xi^4) dxi
    z = y**0.25
    u, w = _gauss_unit()
    xi_nodes = z[:, None] + (1.0 - z[:, None]) * u[None, :]
    integrand = xi_nodes ** (7.0 - 4.0 * alpha) * _difference_quotient(f, xi_nodes**4)
    rest = 4.0 * (1.0 - z) * (integrand @ w)
    return y ** (alpha - 1.0) * (f(0.0) * constant_part + rest)


def hardy_ratio(alpha: float, coeffs: Sequence[float]) -> float:
    """||A_alpha f||_{L^2[0,1]} / ||f||_{L^2[0,1]} for f given by Chebyshev coefficients on [0, 1].

    Raises:
        ConfigError: For the critical exponent alpha = 1/2.
    """
    if alpha == 0.5:
        raise ConfigError("alpha = 1/2 is the critical exponent; the Hardy inequality does not hold there")
    f = Chebyshev(np.asarray(coeffs, dtype=float), domain=[0.0, 1.0])
    z, w = _gauss_unit()
    # y = z^4 keeps the y^{2 alpha - 2} singularity integrable for the quadrature
    average = _weighted_average(f, alpha, z**4)
    numerator = math.sqrt(float(np.sum(w * 4.0 * z**3 * average**2)))
    denominator = math.sqrt(float(np.sum(w * f(z) ** 2)))
    return numerator / denominator


def _random_coefficients(rng: np.random.Generator, degree: int) -> np.ndarray:
    return rng.standard_normal(degree + 1) * np.exp(-RANDOM_DECAY * np.arange(degree + 1))


def check_hardy(alpha: float, trials: int, seed: int = DEFAULT_SEED) -> PropertyReport:
    """Worst Hardy ratio over random smooth f, against the bound 1/|1/2 - alpha|."""
    if alpha == 0.5:
        raise ConfigError("alpha = 1/2 is the critical exponent; the Hardy inequality does not hold there")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        worst = max(worst, hardy_ratio(alpha, _random_coefficients(rng, HARDY_DEGREE)))
    report = PropertyReport(
        name=f"hardy(alpha={alpha:g})",
        seed=seed,
        samples=trials,
        worst_ratio=worst,
        bound=1.0 / abs(0.5 - alpha),
        slack=HARDY_SLACK,
        details={"alpha": alpha, "branch": "lower" if alpha < 0.5 else "upper"},
    )
    logger.info(f"{report.name}: worst {worst:.6f} vs bound {report.bound:.6f}")
    return report


# --- Cokernel moments ---
def cokernel_moments(xi_series: ThetaSeries, N: int = COKERNEL_N, dealias: bool = True) -> Tuple[complex, complex]:
    """Moments against e^{+2i theta} and e^{-2i theta} of the leading term of Xi(psi^{1/2} xi)."""
    a = BracketField.from_theta(0.5, xi_series, make_grid(N))
    lead = xi(a, dealias=dealias).leading()
    return 2.0 * np.pi * lead.mode(-2), 2.0 * np.pi * lead.mode(2)


def _random_series(rng: np.random.Generator, K: int, modes: int) -> ThetaSeries:
    coeffs = np.zeros(2 * K + 1, dtype=complex)
    for k in range(1, modes + 1):
        c = complex(rng.standard_normal(), rng.standard_normal()) * math.exp(-RANDOM_DECAY * k)
        coeffs[K + k] = c
        coeffs[K - k] = np.conj(c)
    return ThetaSeries(coeffs, real=True)


def random_perturbation(rng: np.random.Generator, K: int, modes: int, amplitude: float) -> ThetaSeries:
    """Real band-limited series with sup-norm amplitude and no mean."""
    series = _random_series(rng, K, modes)
    phi = np.linspace(0.0, 2.0 * np.pi, 16 * (2 * K + 1), endpoint=False)
    return series * (amplitude / float(np.max(np.abs(series.evaluate(phi)))))


def check_cokernel(trials: int, amplitude: float, seed: int = DEFAULT_SEED) -> PropertyReport:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        xi_series = ThetaSeries.constant(1.0, COKERNEL_K) + random_perturbation(rng, COKERNEL_K, COKERNEL_MODES, amplitude)
        plus, minus = cokernel_moments(xi_series)
        worst = max(worst, abs(plus), abs(minus))
    report = PropertyReport(
        name="cokernel",
        seed=seed,
        samples=trials,
        worst_ratio=worst,
        bound=COKERNEL_BOUND,
        details={"amplitude": amplitude, "K": COKERNEL_K, "modes": COKERNEL_MODES},
    )
    logger.info(f"cokernel: worst moment {worst:.3e}")
    return report


# --- Linear isomorphism ---
def isomorphism_ratio(
    data: LinearData, gamma: float, m: int, sigma: float, resonance_tol: Optional[float] = RESONANCE_TOL
) -> Tuple[float, LinearSolution]:
    """(|R|^2 + |p|^2 + ||u||_J^2)^{1/2} / (||g||_{X^{m-1/2}}^2 + ||f||_{J^{m-2}}^2)^{1/2}."""
    sol = solve_linear(data, resonance_tol=resonance_tol)
    numerator = math.sqrt(
        abs(sol.R) ** 2 + abs(sol.p[0]) ** 2 + abs(sol.p[1]) ** 2 + j_norm(sol.u, gamma, m, sigma) ** 2
    )
    denominator = math.hypot(x_sigma_norm(data.g, sigma, m - 0.5), j_norm(data.f, gamma, m - 2, sigma))
    return numerator / denominator, sol


def random_linear_data(rng: np.random.Generator, K: int, N: int, modes: int = LINEAR_MODES) -> LinearData:
    """f = psi^{1/2} [xi + L q] with xi_{+-2} = 0 and q(0) = 0 polynomial, g band-limited; all complex."""
    grid = make_grid(N)
    k = np.arange(-K, K + 1)
    active = np.abs(k) <= modes
    decay = np.exp(-RANDOM_DECAY * np.abs(k))
    xi_coeffs = np.where(active & (np.abs(k) != 2), decay, 0.0) * (
        rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
    )
    powers = np.arange(1, BRANCH_DEGREE + 1)
    c = (rng.standard_normal((2 * K + 1, powers.size)) + 1j * rng.standard_normal((2 * K + 1, powers.size)))
    c *= (active * decay)[:, None] * np.exp(-RANDOM_DECAY * powers)[None, :]
    q = c @ grid.nodes[None, :] ** powers[:, None]
    remainder = apply_L(BracketField(0.5, q, grid))
    f = BracketField(0.5, xi_coeffs[:, None] + remainder.h, grid)
    g = ThetaSeries(np.where(active, decay, 0.0) * (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)))
    return LinearData(f, g)


def random_raw_linear_data(rng: np.random.Generator, K: int, N: int, modes: int = LINEAR_MODES) -> LinearData:
    """f = psi^{1/2} sum_j c_kj s^j with only c_{+-2,0} = 0, so log-resonant remainders occur in every |k| >= 3."""
    grid = make_grid(N)
    k = np.arange(-K, K + 1)
    active = np.abs(k) <= modes
    decay = np.exp(-RANDOM_DECAY * np.abs(k))
    powers = np.arange(0, BRANCH_DEGREE + 1)
    c = (rng.standard_normal((2 * K + 1, powers.size)) + 1j * rng.standard_normal((2 * K + 1, powers.size)))
    c *= (active * decay)[:, None] * np.exp(-RANDOM_DECAY * powers)[None, :]
    c[np.abs(k) == 2, 0] = 0.0
    f = BracketField(0.5, c @ grid.nodes[None, :] ** powers[:, None], grid)
    g = ThetaSeries(np.where(active, decay, 0.0) * (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)))
    return LinearData(f, g)


def check_linear_isomorphism(
    trials: int, cfg: SolveConfig, seed: Optional[int] = None, raw: bool = False
) -> PropertyReport:
    """Empirical isomorphism constant, with a round trip and the boundary relation checked per trial.

    The round trip is L u = f + resonance, so raw data (see random_raw_linear_data) passes only
    when the solve certifies its log-resonant part.
    """
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    worst = 0.0
    ratios = []
    failures = 0
    max_roundtrip = 0.0
    max_relation = 0.0
    max_resonance = 0.0
    generate = random_raw_linear_data if raw else random_linear_data
    order = min(cfg.m, MAX_NORM_ORDER)
    for _ in range(trials):
        data = generate(rng, cfg.K, cfg.N)
        ratio, sol = isomorphism_ratio(data, cfg.gamma, order, cfg.sigma, None if raw else RESONANCE_TOL)
        roundtrip = float(np.max(np.abs(apply_L(sol.u).h - data.f.h - sol.resonance.h)))
        max_resonance = max(max_resonance, float(np.max(np.abs(sol.resonance.h))))
        relation = float(np.max(np.abs(boundary_relation(sol, data.g))))
        max_roundtrip = max(max_roundtrip, roundtrip)
        max_relation = max(max_relation, relation)
        if roundtrip >= ROUNDTRIP_TOL or relation >= BOUNDARY_RELATION_TOL:
            failures += 1
            logger.warning(f"Linear round trip failed: L u - f = {roundtrip:.3e}, boundary relation {relation:.3e}")
        ratios.append(ratio)
        worst = max(worst, ratio)
    report = PropertyReport(
        name="linear-isomorphism",
        seed=seed,
        samples=trials,
        worst_ratio=worst,
        bound=ISOMORPHISM_BOUND,
        details={
            "K": cfg.K,
            "N": cfg.N,
            "gamma": cfg.gamma,
            "m": order,
            "sigma": cfg.sigma,
            "mean_ratio": float(np.mean(ratios)) if ratios else 0.0,
            "roundtrip_failures": failures,
            "max_roundtrip": max_roundtrip,
            "max_boundary_relation": max_relation,
            "max_resonance": max_resonance,
            "raw": raw,
        },
    )
    report.passed = report.passed and failures == 0
    logger.info(f"linear: empirical constant {worst:.4g}, {failures} round-trip failures, "
                f"max resonance defect {max_resonance:.3e}")
    return report


# --- Per-mode inverse branches ---
def branch_bounds(k: int, gamma: float) -> Tuple[float, float]:
    """Hardy constants of (L_k^+)^{-1} and (L_k^-)^{-1} in the psi^{-1/2-gamma} weighted L^2 norm."""
    plus = 2.0 / (1.0 + 2.0 * gamma + abs(k))
    if abs(k) < 3:
        minus = 2.0 / (1.0 + 2.0 * gamma - abs(k))
    else:
        minus = 2.0 / (abs(k) - 1.0 - 2.0 * gamma)
    return plus, minus


def _single_mode(values: np.ndarray, k: int, K: int, N: int) -> BracketField:
    grid = make_grid(N)
    h = np.zeros((2 * K + 1, N), dtype=complex)
    h[k + K] = values
    return BracketField(0.5, h, grid)


def check_inverse_branches(
    trials: int, gamma: float = DEFAULT_GAMMA, K: int = BRANCH_K, N: int = BRANCH_N, seed: int = DEFAULT_SEED
) -> PropertyReport:
    """Measured branch ratios divided by their Hardy constants; the bound is 1 with quadrature slack."""
    rng = np.random.default_rng(seed)
    grid = make_grid(N)
    powers = np.arange(1, BRANCH_DEGREE + 1)
    basis = grid.nodes[None, :] ** powers[:, None]
    weight_gamma = 0.5 + gamma
    worst = 0.0
    plus_by_k = np.zeros(K + 1)
    minus_by_k = np.zeros(K + 1)
    for _ in range(trials):
        for k in range(-K, K + 1):
            bound_plus, bound_minus = branch_bounds(k, gamma)
            for branch, bound in (("plus", bound_plus), ("minus", bound_minus)):
                c = rng.standard_normal(powers.size) * np.exp(-RANDOM_DECAY * powers)
                if branch == "minus" and abs(k) >= 3 and abs(k) - 2 <= BRANCH_DEGREE:
                    # s^{|k|-2} inverts to s^{|k|-2} log s; solve_linear certifies that part as a defect
                    c[abs(k) - 3] = 0.0
                eta = SGridFunction(c @ basis, grid)
                inverse = apply_Lk_plus_inverse if branch == "plus" else apply_Lk_minus_inverse
                w = inverse(eta, k)
                ratio = kondratev_norm(_single_mode(w.values, k, K, N), weight_gamma, 0) / kondratev_norm(
                    _single_mode(eta.values, k, K, N), weight_gamma, 0
                )
                table = plus_by_k if branch == "plus" else minus_by_k
                table[abs(k)] = max(table[abs(k)], ratio)
                worst = max(worst, ratio / bound)
    report = PropertyReport(
        name="inverse-branches",
        seed=seed,
        samples=trials,
        worst_ratio=worst,
        bound=1.0,
        slack=HARDY_SLACK,
        details={
            "gamma": gamma,
            "K": K,
            "N": N,
            "plus_worst_by_k": plus_by_k.tolist(),
            "minus_worst_by_k": minus_by_k.tolist(),
        },
    )
    logger.info(f"branches: worst ratio/bound {worst:.4f}")
    return report


# --- Analyticity strip ---
def strip_margin_report(sol: FlowLineFamily, b: BoundaryCurve, cfg: SolveConfig) -> PropertyReport:
    """Checks sigma + excursion(phi - theta) <= tau and sigma <= width of the trace a(1, theta).

    worst_ratio is the larger of (sigma + excursion) / tau and sigma / width, against the bound 1.
    """
    trace = ThetaSeries(sol.a.trace().coeffs, real=True)
    floor = max(AMPLITUDE_FLOOR, 100.0 * cfg.tol_residual)
    phi_minus_theta = phi_angle(sol.R, sol.p, trace)
    excursion = strip_excursion(phi_minus_theta, cfg.sigma)
    width = trace_width(trace, floor)
    width_ratio = cfg.sigma / width if width > 0 else math.inf
    worst = max((cfg.sigma + excursion) / b.tau, width_ratio)
    return PropertyReport(
        name="strip-margin",
        seed=cfg.seed,
        samples=1,
        worst_ratio=worst,
        bound=1.0,
        details={
            "sigma": cfg.sigma,
            "tau": b.tau,
            "excursion": excursion,
            "margin": b.tau - cfg.sigma - excursion,
            "trace_width": width,
            "phi_width": trace_width(phi_minus_theta, floor),
        },
    )

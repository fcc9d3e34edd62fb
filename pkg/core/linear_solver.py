"""
Linear Solver Module

Explicit inverse of the linearization L u = [psi^2 d_psi^2 + 2 psi d_psi + (1 + d_theta^2)/4] u
at the reference flow. Per Fourier mode, L_k = L_k^+ L_k^- with first-order Cauchy-Euler
factors whose inverses are weighted averages; on the smooth factor h of psi^{1/2} h they
read (E + c/2) h = e with E = (s/2) d_s, i.e. s h' + c h = 2e, which sends s^j to 2 s^j / (j + c).
"""

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from core.data_contracts import CokernelViolationError, GridError, LinearData, LinearSolution
from core.spectral_core import (
    BracketField,
    SGrid,
    SGridFunction,
    ThetaSeries,
    decompose_leading,
    make_grid,
)
from utils.constants import AMPLITUDE_FLOOR, DEFAULT_COKERNEL_TOL, RESONANCE_TOL

logger = logging.getLogger(__name__)

ANCHOR_NONE = "none"
ANCHOR_ORIGIN = "origin"  # h(0) = 0, used when c = 0
ANCHOR_TRACE = "trace"  # h(1) = 0, used when c < 0


def apply_L(u: BracketField) -> BracketField:
    """L on psi^lam h is psi^lam [E^2 + (2 lam + 1) E + lam^2 + lam + (1 - k^2)/4] h."""
    grid = u.grid
    lam = u.lam
    k2 = (u.wavenumbers**2)[:, None]
    Eh = grid.euler(u.h)
    E2h = grid.euler(Eh)
    h = E2h + (2.0 * lam + 1.0) * Eh + (lam**2 + lam + 0.25 * (1.0 - k2)) * u.h
    return BracketField(lam, h, grid)


@lru_cache(maxsize=None)
def _factor_lu(N: int, c: float, anchor: str):
    grid = make_grid(N)
    M = grid.nodes[:, None] * grid.D + c * np.eye(N)
    if anchor == ANCHOR_ORIGIN:
        M[0, :] = 0.0
        M[0, 0] = 1.0
    elif anchor == ANCHOR_TRACE:
        M[-1, :] = 0.0
        M[-1, -1] = 1.0
    return lu_factor(M)


def _first_order_inverse(eta: np.ndarray, c: float, anchor: str, grid: SGrid) -> np.ndarray:
    rhs = 2.0 * np.asarray(eta, dtype=complex)
    if anchor == ANCHOR_ORIGIN:
        rhs[0] = 0.0
    elif anchor == ANCHOR_TRACE:
        rhs[-1] = 0.0
    return lu_solve(_factor_lu(grid.N, float(c), anchor), rhs)


def _anchor_defect(h: np.ndarray, eta: np.ndarray, c: float, anchor: str, grid: SGrid) -> np.ndarray:
    """(E + c/2) h - eta on the nodes.

    The anchored row is the only equation the collocation drops, so the defect is zero
    except there; it is nonzero when eta has a component on the kernel power s^{-c},
    whose true inverse carries s^{-c} log s.
    """
    defect = np.zeros(grid.N, dtype=complex)
    if anchor == ANCHOR_NONE:
        return defect
    row = 0 if anchor == ANCHOR_ORIGIN else -1
    defect[row] = 0.5 * (grid.nodes[row] * (grid.D[row] @ h) + c * h[row]) - eta[row]
    return defect


def _minus_branch(k: int) -> Tuple[float, str]:
    c = 2.0 - abs(k)
    if abs(k) < 2:
        return c, ANCHOR_NONE
    if abs(k) == 2:
        return c, ANCHOR_ORIGIN
    return c, ANCHOR_TRACE


def apply_Lk_plus_inverse(eta: SGridFunction, k: int) -> SGridFunction:
    """psi^{-(1+|k|)/2} int_0^psi t^{(-1+|k|)/2} eta dt, on the smooth factor of a lambda = 1/2 field."""
    return SGridFunction(_first_order_inverse(eta.values, 2.0 + abs(k), ANCHOR_NONE, eta.grid), eta.grid)


def apply_Lk_minus_inverse(eta: SGridFunction, k: int) -> SGridFunction:
    """Weighted average from 0 for |k| < 3; minus the average from psi to 1 for |k| >= 3 (vanishes at psi = 1)."""
    c, anchor = _minus_branch(k)
    return SGridFunction(_first_order_inverse(eta.values, c, anchor, eta.grid), eta.grid)


def minus_inverse_defect(eta: SGridFunction, k: int) -> SGridFunction:
    """L_k^- w - eta for w = apply_Lk_minus_inverse(eta, k).

    Zero up to roundoff unless |k| >= 3 and eta has an s^{|k|-2} component; w then
    inverts eta + defect exactly.
    """
    c, anchor = _minus_branch(k)
    w = _first_order_inverse(eta.values, c, anchor, eta.grid)
    return SGridFunction(_anchor_defect(w, np.asarray(eta.values, dtype=complex), c, anchor, eta.grid), eta.grid)


def _remainder_with_defect(eta: BracketField) -> Tuple[BracketField, BracketField]:
    if eta.lam != 0.5:
        raise GridError(f"solve_remainder expects lambda = 1/2, got {eta.lam}")
    grid = eta.grid
    out = np.empty_like(eta.h)
    defect = np.zeros_like(eta.h)
    for idx, k in enumerate(eta.wavenumbers):
        c_plus = 2.0 + abs(k)
        half = _first_order_inverse(eta.h[idx], c_plus, ANCHOR_NONE, grid)
        c, anchor = _minus_branch(int(k))
        out[idx] = _first_order_inverse(half, c, anchor, grid)
        delta = _anchor_defect(out[idx], half, c, anchor, grid)
        if np.any(delta):
            # L_k = (E + c_plus/2)(E + c/2), so the interior defect is (E + c_plus/2) delta
            defect[idx] = grid.euler(delta) + 0.5 * c_plus * delta
    return BracketField(0.5, out, grid), BracketField(0.5, defect, grid)


def solve_remainder(eta: BracketField) -> BracketField:
    """w_k = (L_k^-)^{-1} (L_k^+)^{-1} eta_k for every mode; w_k(1) = 0 for |k| >= 3."""
    return _remainder_with_defect(eta)[0]


def solve_leading(xi: ThetaSeries, cokernel_tol: float = DEFAULT_COKERNEL_TOL) -> ThetaSeries:
    """(1 - k^2/4) v_k = xi_k with v_{+-2} = 0.

    Raises:
        CokernelViolationError: If |xi_{+-2}| exceeds cokernel_tol.
    """
    moments = max(abs(xi.mode(2)), abs(xi.mode(-2)))
    if moments > cokernel_tol:
        raise CokernelViolationError(f"Leading data has |xi_(+-2)| = {moments:.3e} > {cokernel_tol:.1e}")
    k = xi.wavenumbers.astype(float)
    denom = 1.0 - 0.25 * k**2
    resonant = np.abs(k) == 2
    v = np.where(resonant, 0.0, xi.coeffs / np.where(resonant, 1.0, denom))
    return ThetaSeries(v, xi.real)


def _homogeneous_profiles(K: int, grid: SGrid) -> np.ndarray:
    """Rows s^{|k|-2} for |k| >= 2 (smooth factors of psi^{(-1+|k|)/2}), zero otherwise."""
    k = np.abs(np.arange(-K, K + 1))
    profiles = np.zeros((2 * K + 1, grid.N))
    active = k >= 2
    profiles[active] = grid.nodes[None, :] ** (k[active, None] - 2)
    return profiles


def _fit_boundary(g: ThetaSeries, K: int) -> ThetaSeries:
    if g.K > K:
        dropped = np.concatenate([g.coeffs[: g.K - K], g.coeffs[g.K + K + 1:]])
        if np.max(np.abs(dropped)) > AMPLITUDE_FLOOR:
            logger.warning(f"Dropped boundary modes above K={K} (max amplitude {np.max(np.abs(dropped)):.3e})")
    return g.resized(K)


def _matching(g: ThetaSeries, trace_part: np.ndarray, K: int) -> Tuple[complex, Tuple[complex, complex]]:
    """Read R and p off the |k| <= 1 modes of g - (trace already fixed by u)."""
    rest = g.coeffs - trace_part
    R = rest[K]
    px = rest[K + 1] + rest[K - 1]
    py = 1j * (rest[K + 1] - rest[K - 1])
    return complex(R), (complex(px), complex(py))


def solve_homogeneous(g: ThetaSeries, grid: SGrid, K: Optional[int] = None) -> LinearSolution:
    """f = 0: R = g_0, p from the |k| = 1 modes, u = sum_{|k|>=2} g_k psi^{(-1+|k|)/2} e^{ik theta}.

    Modes of g above the cutoff K (default g.K) are dropped with a warning.
    """
    K = g.K if K is None else K
    g = _fit_boundary(g, K)
    c = g.coeffs.copy()
    c[np.abs(g.wavenumbers) < 2] = 0.0
    u = BracketField(0.5, c[:, None] * _homogeneous_profiles(K, grid), grid)
    R, p = _matching(g, np.zeros_like(g.coeffs), K)
    return LinearSolution(R=R, p=p, u=u, homogeneous_coeffs=c)


def solve_linear(
    data: LinearData, cokernel_tol: float = DEFAULT_COKERNEL_TOL, resonance_tol: Optional[float] = RESONANCE_TOL
) -> LinearSolution:
    """Solve L u = f in the interior and R + p.e_r + u(1, theta) = g on the boundary.

    Remainder data with an s^{|k|-2} component in a mode |k| >= 3 has no polynomial
    preimage; u then solves L u = f + resonance, with the defect returned in the
    solution and logged when it exceeds resonance_tol (None disables the warning).
    """
    f = data.f
    if f.lam != 0.5:
        raise GridError(f"solve_linear expects f with lambda = 1/2, got {f.lam}")
    K, grid = f.K, f.grid
    g = _fit_boundary(data.g, K)
    xi_series, eta = decompose_leading(f)
    v = solve_leading(xi_series, cokernel_tol)
    w, resonance = _remainder_with_defect(eta)
    w_trace = w.h[:, -1]

    k = np.abs(g.wavenumbers)
    c = np.zeros(2 * K + 1, dtype=complex)
    c[k == 2] = g.coeffs[k == 2] - w_trace[k == 2]
    c[k >= 3] = g.coeffs[k >= 3] - v.coeffs[k >= 3]

    h = v.coeffs[:, None] + w.h + c[:, None] * _homogeneous_profiles(K, grid)
    R, p = _matching(g, v.coeffs + w_trace, K)
    defect = float(np.max(np.abs(resonance.h)))
    if resonance_tol is not None and defect > resonance_tol:
        modes = resonance.wavenumbers[np.max(np.abs(resonance.h), axis=1) > resonance_tol]
        logger.warning(f"Log-resonant data in modes {sorted(set(np.abs(modes).tolist()))}: "
                       f"L u - f = {defect:.3e} (returned as the resonance defect)")
    return LinearSolution(R=R, p=p, u=BracketField(0.5, h, grid), homogeneous_coeffs=c, resonance=resonance)


def solve_linear_problem(f: BracketField, g: ThetaSeries, cokernel_tol: float = DEFAULT_COKERNEL_TOL) -> LinearSolution:
    """Entry point for psi^{-1/2}-form data (lambda = 0); multiplies by psi^{1/2} first."""
    if f.lam != 0.0:
        raise GridError(f"solve_linear_problem expects lambda = 0 data, got {f.lam}")
    return solve_linear(LinearData(f.shift(0.5), g), cokernel_tol)


def boundary_relation(sol: LinearSolution, g: ThetaSeries) -> np.ndarray:
    """Mode-wise R + ((p_x - i p_y)/2) e^{i theta} + ((p_x + i p_y)/2) e^{-i theta} + u(1, theta) - g."""
    K = sol.u.K
    lhs = sol.u.h[:, -1].copy()
    lhs[K] += sol.R
    lhs[K + 1] += 0.5 * (sol.p[0] - 1j * sol.p[1])
    lhs[K - 1] += 0.5 * (sol.p[0] + 1j * sol.p[1])
    return lhs - g.resized(K).coeffs

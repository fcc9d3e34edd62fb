"""
Field Operations Module

Bracket-normalized evaluation of the vorticity operator Xi(a), the velocity field,
the ellipticity AC - B^2 and the nonlinear boundary operator B(b, R, p, a).
All nonlinear arithmetic happens pointwise on the (theta, s) tensor grid.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.data_contracts import BoundaryError, DegeneracyError, GridError, UndefinedWidthError, WindingError
from core.spectral_core import (
    BracketField,
    ThetaSeries,
    analyticity_width,
    physical_to_modes,
    resize_modes,
    theta_nodes,
    theta_transform,
)
from utils.constants import BOUNDARY_CHECK_OVERSAMPLE, DEFAULT_DEGENERACY_TOL, DEFAULT_TAU

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Domain boundary rho = b(phi) in polar coordinates about the origin."""

    b: ThetaSeries
    tau: float = DEFAULT_TAU  # declared analyticity width of b

    def __post_init__(self):
        if self.tau <= 0:
            raise BoundaryError(f"boundary.tau must be positive, got {self.tau}")
        n = BOUNDARY_CHECK_OVERSAMPLE * (2 * self.b.K + 1)
        phi = 2.0 * np.pi * np.arange(n) / n
        values = self.b.evaluate(phi)
        if np.max(np.abs(np.imag(values))) > 1e-10 * max(1.0, np.max(np.abs(values))):
            raise BoundaryError("boundary: b(phi) must be real-valued")
        b_min = float(np.min(np.real(values)))
        if b_min <= 0:
            raise BoundaryError(f"boundary: min b(phi) = {b_min:.6g} must be positive")

    def radius(self, phi: np.ndarray) -> np.ndarray:
        return np.real(self.b.evaluate(phi))

    def scaled(self, c: float) -> "BoundaryCurve":
        return BoundaryCurve(self.b * c, self.tau)


def disk_boundary(radius: float = 1.0, K: int = 3, tau: float = math.inf) -> BoundaryCurve:
    """Circle of the given radius about the origin; entire, so any tau is admissible."""
    return BoundaryCurve(ThetaSeries.constant(radius, K), tau)


def translated_disk_boundary(eps: float, K: int = 32, tau: float = DEFAULT_TAU) -> BoundaryCurve:
    """Unit circle centred at (eps, 0): b(phi) = eps cos phi + sqrt(1 - eps^2 sin^2 phi)."""
    phi = theta_nodes(K)
    values = eps * np.cos(phi) + np.sqrt(1.0 - eps**2 * np.sin(phi) ** 2)
    return BoundaryCurve(theta_transform(values, K, real=True), tau)


# --- Brackets ---
@dataclass(frozen=True, eq=False)
class Brackets:
    """The six lambda = 0 brackets of a = psi^{1/2} h, stored as modes."""

    B1: BracketField  # [psi^{-1/2} a]
    B2: BracketField  # [psi^{1/2} a_psi]
    B3: BracketField  # [psi^{-1/2} a_theta]
    B4: BracketField  # [psi^{-1/2} a_theta theta]
    B5: BracketField  # [psi^{1/2} a_psi theta]
    B6: BracketField  # [psi^{3/2} a_psi psi]

    def as_tuple(self) -> Tuple[BracketField, ...]:
        return (self.B1, self.B2, self.B3, self.B4, self.B5, self.B6)


def _check_half(a: BracketField, op: str) -> None:
    if a.lam != 0.5:
        raise GridError(f"{op} expects a field with lambda = 1/2, got {a.lam}")


def brackets(a: BracketField) -> Brackets:
    """Chain rule d_psi = (1/(2s)) d_s applied to a = s h."""
    _check_half(a, "brackets")
    grid = a.grid
    s = grid.nodes
    ik = 1j * a.wavenumbers[:, None]
    h = a.h
    hs = grid.derivative(h)
    hss = grid.derivative(hs)
    parts = (
        h,
        0.5 * (h + s * hs),
        ik * h,
        ik**2 * h,
        0.5 * ik * (h + s * hs),
        0.25 * (s**2 * hss + s * hs - h),
    )
    return Brackets(*(BracketField(0.0, part, grid) for part in parts))


def _physical_brackets(a: BracketField, K_out: int, tol: float) -> Tuple[np.ndarray, ...]:
    values = tuple(b.physical(K_out) for b in brackets(a).as_tuple())
    b1, b2 = values[0], values[1]
    worst = min(float(np.min(np.abs(b1))), float(np.min(np.abs(b2))))
    if worst < tol:
        logger.error(f"Bracket degeneracy: min(|B1|, |B2|) = {worst:.3e} < {tol:.1e}")
        raise DegeneracyError(f"Flow-line family left the admissible set: min(|B1|, |B2|) = {worst:.3e}")
    return values


def _padded_K(K: int, dealias: bool) -> int:
    return (3 * K + 1) // 2 if dealias else K


def _to_field(lam: float, values: np.ndarray, a: BracketField, K_eval: int) -> BracketField:
    coeffs = physical_to_modes(values)
    return BracketField(lam, resize_modes(coeffs, a.K) if K_eval != a.K else coeffs, a.grid)


def xi(a: BracketField, dealias: bool = False, tol: float = DEFAULT_DEGENERACY_TOL) -> BracketField:
    """Vorticity Xi(a) as a lambda = 0 field.

    Raises:
        DegeneracyError: If |B1| or |B2| falls below tol anywhere on the grid.
    """
    _check_half(a, "xi")
    K_eval = _padded_K(a.K, dealias)
    b1, b2, b3, b4, b5, b6 = _physical_brackets(a, K_eval, tol)
    values = (
        -(1.0 + b3**2 / b1**2) * b6 / b2**3
        + 2.0 * b3 * b5 / (b1**2 * b2**2)
        - b4 / (b1**2 * b2)
        + 1.0 / (b1 * b2)
    )
    return _to_field(0.0, values, a, K_eval)


def velocity(a: BracketField, tol: float = DEFAULT_DEGENERACY_TOL) -> Tuple[BracketField, BracketField]:
    """(u_r, u_theta) = (a_theta / a, 1) / a_psi, both with lambda = 1/2."""
    _check_half(a, "velocity")
    b1, b2, b3 = _physical_brackets(a, a.K, tol)[:3]
    u_r = _to_field(0.5, b3 / (b1 * b2), a, a.K)
    u_theta = _to_field(0.5, 1.0 / b2, a, a.K)
    return u_r, u_theta


def ellipticity(a: BracketField, tol: float = DEFAULT_DEGENERACY_TOL) -> BracketField:
    """AC - B^2 = 1 / (a^2 a_psi^4) = psi / (B1^2 B2^4)."""
    _check_half(a, "ellipticity")
    b1, b2 = _physical_brackets(a, a.K, tol)[:2]
    return _to_field(1.0, 1.0 / (b1**2 * b2**4), a, a.K)


# --- Boundary geometry ---
def _mapped_boundary(R: float, p: Tuple[float, float], trace: ThetaSeries) -> Tuple[np.ndarray, ...]:
    theta = theta_nodes(trace.K)
    t = np.real(trace.samples())
    x = p[0] + R * t * np.cos(theta)
    y = p[1] + R * t * np.sin(theta)
    return theta, t, x, y


def _unwrapped_angle(theta: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if np.any(np.hypot(x, y) == 0.0):
        raise WindingError("Mapped boundary passes through the origin")
    phi = np.unwrap(np.arctan2(y, x))
    closing = np.angle(np.exp(1j * (phi[0] + 2.0 * np.pi - phi[-1])))
    winding = (phi[-1] - phi[0] + closing) / (2.0 * np.pi)
    if abs(winding - 1.0) > 1e-6:
        logger.error(f"Mapped boundary winds {winding:.3f} times around the origin")
        raise WindingError(f"Mapped boundary winds {winding:.3f} times around the origin, expected 1")
    return phi


def phi_angle(R: float, p: Tuple[float, float], trace: ThetaSeries) -> ThetaSeries:
    """Continuous branch of phi(theta) = arg(p + R t(theta) e^{i theta}), returned as phi - theta.

    Raises:
        WindingError: If the curve does not wind once around the origin.
    """
    theta, _, x, y = _mapped_boundary(R, p, trace)
    phi = _unwrapped_angle(theta, x, y)
    return theta_transform(phi - theta, trace.K, real=True)


def boundary_op(
    b: BoundaryCurve, R: float, p: Tuple[float, float], a: BracketField, sigma: Optional[float] = None
) -> ThetaSeries:
    """B = -b(phi)^2 + R^2 t^2 + 2Rt (p_x cos theta + p_y sin theta) + |p|^2 with t = a(1, theta).

    When sigma is given, a warning is logged if the strip excursion of phi - theta exceeds tau - sigma.
    """
    _check_half(a, "boundary_op")
    trace = ThetaSeries(a.trace().coeffs, real=True)
    theta, t, x, y = _mapped_boundary(R, p, trace)
    phi = _unwrapped_angle(theta, x, y)
    rho_b = b.radius(phi)
    values = (
        -(rho_b**2)
        + R**2 * t**2
        + 2.0 * R * t * (p[0] * np.cos(theta) + p[1] * np.sin(theta))
        + p[0] ** 2
        + p[1] ** 2
    )
    if sigma is not None:
        excursion = strip_excursion(theta_transform(phi - theta, trace.K, real=True), sigma)
        if sigma + excursion > b.tau:
            logger.warning(f"Strip margin exceeded: sigma + excursion = {sigma + excursion:.4f} > tau = {b.tau}")
    return theta_transform(values, trace.K, real=True)


def boundary_op_geometric(b: BoundaryCurve, R: float, p: Tuple[float, float], a: BracketField) -> ThetaSeries:
    """rho(theta)^2 - b(phi(theta))^2 from the mapped boundary point directly."""
    trace = ThetaSeries(a.trace().coeffs, real=True)
    theta, _, x, y = _mapped_boundary(R, p, trace)
    phi = _unwrapped_angle(theta, x, y)
    return theta_transform(x**2 + y**2 - b.radius(phi) ** 2, trace.K, real=True)


def strip_excursion(phi_minus_theta: ThetaSeries, sigma: float) -> float:
    """Bound on |Im(phi - theta)| over the strip |Im theta| <= sigma."""
    k = phi_minus_theta.wavenumbers
    nonzero = k != 0
    return float(np.sum(np.abs(phi_minus_theta.coeffs[nonzero]) * np.exp(sigma * np.abs(k[nonzero]))))


def trace_width(trace: ThetaSeries, floor: float) -> float:
    try:
        return analyticity_width(trace, floor).width
    except UndefinedWidthError:
        return math.inf

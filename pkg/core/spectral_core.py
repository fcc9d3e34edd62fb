"""
Spectral Core Module

Fourier series in theta, Chebyshev-Gauss-Lobatto collocation in s = sqrt(psi),
bracket fields psi^lambda * h(s, theta) and the weighted norms measured on them.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from numpy.polynomial import chebyshev

from core.data_contracts import GridError, UndefinedWidthError, WidthEstimate
from utils.constants import (
    AMPLITUDE_FLOOR,
    MAX_NORM_ORDER,
    MIN_SERIES_K,
    MIN_WIDTH_POINTS,
    NORM_CAP,
    TAYLOR_TOL,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, list, float]


def theta_nodes(K: int) -> np.ndarray:
    """Equispaced angles 2*pi*j/(2K+1), j = 0..2K."""
    n = 2 * K + 1
    return 2.0 * np.pi * np.arange(n) / n


def resize_modes(coeffs: np.ndarray, K_new: int) -> np.ndarray:
    """Zero-pad or truncate centred mode arrays (axis 0) to cutoff K_new."""
    K_old = (coeffs.shape[0] - 1) // 2
    if K_new == K_old:
        return coeffs.copy()
    out = np.zeros((2 * K_new + 1,) + coeffs.shape[1:], dtype=complex)
    if K_new > K_old:
        out[K_new - K_old:K_new + K_old + 1] = coeffs
    else:
        out[:] = coeffs[K_old - K_new:K_old + K_new + 1]
    return out


def modes_to_physical(coeffs: np.ndarray, K_out: Optional[int] = None) -> np.ndarray:
    """Evaluate centred mode arrays on the 2K_out+1 equispaced theta nodes."""
    if K_out is not None:
        coeffs = resize_modes(coeffs, K_out)
    return np.fft.ifft(np.fft.ifftshift(coeffs, axes=0), axis=0, norm="forward")


def physical_to_modes(values: np.ndarray, real: bool = False) -> np.ndarray:
    coeffs = np.fft.fftshift(np.fft.fft(values, axis=0, norm="forward"), axes=0)
    if real:
        coeffs = 0.5 * (coeffs + np.conj(coeffs[::-1]))
    return coeffs


@dataclass(frozen=True, eq=False)
class ThetaSeries:
    """Complex Fourier series sum_k c_k e^{ik theta}, k = -K..K."""

    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise GridError(f"ThetaSeries needs 2K+1 coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def mode(self, k: int) -> complex:
        if abs(k) > self.K:
            return 0j
        return complex(self.coeffs[k + self.K])

    def evaluate(self, theta: ArrayLike) -> np.ndarray:
        """Direct (non-uniform) evaluation at arbitrary real angles."""
        theta = np.asarray(theta, dtype=float)
        vals = np.exp(1j * np.multiply.outer(theta, self.wavenumbers)) @ self.coeffs
        return vals.real if self.real else vals

    def samples(self) -> np.ndarray:
        vals = modes_to_physical(self.coeffs)
        return vals.real if self.real else vals

    def resized(self, K: int) -> "ThetaSeries":
        return ThetaSeries(resize_modes(self.coeffs, K), self.real)

    def _combine(self, other: "ThetaSeries", sign: float) -> "ThetaSeries":
        K = max(self.K, other.K)
        coeffs = resize_modes(self.coeffs, K) + sign * resize_modes(other.coeffs, K)
        return ThetaSeries(coeffs, self.real and other.real)

    def __add__(self, other: "ThetaSeries") -> "ThetaSeries":
        return self._combine(other, 1.0)

    def __sub__(self, other: "ThetaSeries") -> "ThetaSeries":
        return self._combine(other, -1.0)

    def __mul__(self, scalar: float) -> "ThetaSeries":
        return ThetaSeries(self.coeffs * scalar, self.real and np.isrealobj(scalar))

    __rmul__ = __mul__

    @classmethod
    def constant(cls, value: float, K: int = MIN_SERIES_K) -> "ThetaSeries":
        coeffs = np.zeros(2 * K + 1, dtype=complex)
        coeffs[K] = value
        return cls(coeffs, real=True)

    @classmethod
    def from_cos_sin(cls, cos_coeffs, sin_coeffs=None, K: Optional[int] = None) -> "ThetaSeries":
        """Build a real series a_0 + sum a_n cos n theta + b_n sin n theta."""
        a = np.asarray(cos_coeffs, dtype=float)
        b = np.zeros(0) if sin_coeffs is None else np.asarray(sin_coeffs, dtype=float)
        n_max = max(a.size, b.size) - 1
        K = max(n_max, MIN_SERIES_K) if K is None else K
        coeffs = np.zeros(2 * K + 1, dtype=complex)
        for n in range(min(n_max, K) + 1):
            an = a[n] if n < a.size else 0.0
            bn = b[n] if n < b.size else 0.0
            if n == 0:
                coeffs[K] = an
            else:
                coeffs[K + n] = 0.5 * (an - 1j * bn)
                coeffs[K - n] = 0.5 * (an + 1j * bn)
        if n_max > K:
            logger.warning(f"Dropped cos/sin modes above K={K} (highest given: {n_max})")
        return cls(coeffs, real=True)


def theta_transform(samples: ArrayLike, K: Optional[int] = None, real: bool = False) -> ThetaSeries:
    """Discrete Fourier coefficients of 2K+1 equispaced samples starting at theta = 0.

    Raises:
        GridError: If the sample count is not odd, below 2*3+1, or differs from 2K+1.
    """
    values = np.asarray(samples)
    if values.ndim != 1 or values.size % 2 == 0 or values.size < 2 * MIN_SERIES_K + 1:
        raise GridError(f"theta_transform needs 2K+1 samples with K >= {MIN_SERIES_K}, got {values.size}")
    if K is not None and values.size != 2 * K + 1:
        raise GridError(f"Expected {2 * K + 1} samples for K={K}, got {values.size}")
    return ThetaSeries(physical_to_modes(values.astype(complex), real=real), real=real)


def diff_theta(f: ThetaSeries, order: int) -> ThetaSeries:
    if order < 0:
        raise GridError(f"Derivative order must be non-negative, got {order}")
    factor = (1j * f.wavenumbers) ** order
    return ThetaSeries(f.coeffs * factor, f.real)


# --- Radial collocation in s ---
@dataclass(frozen=True, eq=False)
class SGrid:
    """Chebyshev-Gauss-Lobatto nodes mapped to s in [0, 1], increasing."""

    N: int

    def __post_init__(self):
        if self.N < 3:
            raise GridError(f"SGrid needs at least 3 nodes, got {self.N}")

    @cached_property
    def _x(self) -> np.ndarray:
        n = self.N - 1
        j = np.arange(self.N)
        return np.sin(np.pi * (n - 2 * j) / (2 * n))

    @cached_property
    def nodes(self) -> np.ndarray:
        s = 0.5 * (1.0 - self._x)
        s[0], s[-1] = 0.0, 1.0
        return s

    @cached_property
    def D(self) -> np.ndarray:
        """Collocation derivative d/ds; d/ds = -2 d/dx for x = 1 - 2s."""
        n = self.N - 1
        x = self._x
        j = np.arange(self.N)
        c = np.hstack(([2.0], np.ones(n - 1), [2.0])) * (-1.0) ** j
        dX = x[:, None] - x[None, :]
        D = np.outer(c, 1.0 / c) / (dX + np.eye(self.N))
        D -= np.diag(D.sum(axis=1))
        return -2.0 * D

    @cached_property
    def weights(self) -> np.ndarray:
        """Clenshaw-Curtis weights on [0, 1]."""
        n = self.N - 1
        theta = np.pi * np.arange(self.N) / n
        w = np.zeros(self.N)
        inner = np.arange(1, n)
        v = np.ones(n - 1)
        if n % 2 == 0:
            w[0] = w[n] = 1.0 / (n**2 - 1.0)
            for k in range(1, n // 2):
                v -= 2.0 * np.cos(2.0 * k * theta[inner]) / (4.0 * k**2 - 1.0)
            v -= np.cos(n * theta[inner]) / (n**2 - 1.0)
        else:
            w[0] = w[n] = 1.0 / n**2
            for k in range(1, (n - 1) // 2 + 1):
                v -= 2.0 * np.cos(2.0 * k * theta[inner]) / (4.0 * k**2 - 1.0)
        w[inner] = 2.0 * v / n
        return 0.5 * w

    @cached_property
    def cheb_matrix(self) -> np.ndarray:
        """Maps node values to Chebyshev coefficients in t = 2s - 1."""
        return np.linalg.inv(chebyshev.chebvander(2.0 * self.nodes - 1.0, self.N - 1))

    def derivative(self, values: np.ndarray) -> np.ndarray:
        """d/ds along the last axis; constants map to exactly zero."""
        return (values - values[..., :1]) @ self.D.T

    def euler(self, values: np.ndarray) -> np.ndarray:
        """(s/2) d/ds, i.e. psi d/dpsi acting on the smooth factor."""
        return 0.5 * self.nodes * self.derivative(values)

    def evaluate(self, values: np.ndarray, s: ArrayLike) -> np.ndarray:
        """Interpolate row-wise: row i of values (length N) is evaluated at s[i]."""
        coeffs = np.asarray(values) @ self.cheb_matrix.T
        T = chebyshev.chebvander(2.0 * np.asarray(s, dtype=float) - 1.0, self.N - 1)
        return np.sum(T * coeffs, axis=-1)


@lru_cache(maxsize=None)
def make_grid(N: int) -> SGrid:
    return SGrid(N)


@dataclass(frozen=True, eq=False)
class SGridFunction:
    values: np.ndarray
    grid: SGrid

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.N,):
            raise GridError(f"SGridFunction length {v.shape} does not match grid N={self.grid.N}")
        object.__setattr__(self, "values", v)


def diff_s(f: SGridFunction, order: int) -> SGridFunction:
    if order not in (1, 2):
        raise GridError(f"diff_s supports order 1 or 2, got {order}")
    d = f.grid.derivative(f.values)
    if order == 2:
        d = f.grid.derivative(d)
    return SGridFunction(d, f.grid)


@dataclass(frozen=True, eq=False)
class BracketField:
    """Field psi^lam * h(s, theta) with h stored as Fourier modes x s-nodes."""

    lam: float
    h: np.ndarray
    grid: SGrid

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 2 or h.shape[0] % 2 == 0 or h.shape[1] != self.grid.N:
            raise GridError(f"BracketField h must have shape (2K+1, {self.grid.N}), got {h.shape}")
        object.__setattr__(self, "h", h)

    @property
    def K(self) -> int:
        return (self.h.shape[0] - 1) // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def mode(self, k: int) -> SGridFunction:
        return SGridFunction(self.h[k + self.K], self.grid)

    def shift(self, alpha: float) -> "BracketField":
        """Multiply by psi^alpha."""
        return BracketField(self.lam + alpha, self.h, self.grid)

    def _check_compatible(self, other: "BracketField") -> None:
        if self.lam != other.lam or self.h.shape != other.h.shape:
            raise GridError(f"Cannot combine fields with lambda {self.lam} / {other.lam} and shapes "
                            f"{self.h.shape} / {other.h.shape}")

    def __add__(self, other: "BracketField") -> "BracketField":
        self._check_compatible(other)
        return BracketField(self.lam, self.h + other.h, self.grid)

    def __sub__(self, other: "BracketField") -> "BracketField":
        self._check_compatible(other)
        return BracketField(self.lam, self.h - other.h, self.grid)

    def __mul__(self, scalar: complex) -> "BracketField":
        return BracketField(self.lam, self.h * scalar, self.grid)

    __rmul__ = __mul__

    def physical(self, K_out: Optional[int] = None) -> np.ndarray:
        """h on the (theta, s) tensor grid, shape (2K+1, N)."""
        return modes_to_physical(self.h, K_out)

    def values(self) -> np.ndarray:
        """Full field values psi^lam * h on the tensor grid."""
        return self.grid.nodes ** (2.0 * self.lam) * self.physical()

    def leading(self) -> ThetaSeries:
        return ThetaSeries(self.h[:, 0].copy())

    def trace(self) -> ThetaSeries:
        """Value at psi = 1, where s^{2 lam} = 1."""
        return ThetaSeries(self.h[:, -1].copy())

    def real_part(self) -> "BracketField":
        """Project onto real-valued fields (c_{-k} = conj(c_k))."""
        return BracketField(self.lam, physical_to_modes(self.physical().real.astype(complex), real=True), self.grid)

    @classmethod
    def from_physical(cls, lam: float, values: np.ndarray, grid: SGrid, K: Optional[int] = None,
                      real: bool = False) -> "BracketField":
        coeffs = physical_to_modes(np.asarray(values, dtype=complex), real=real)
        if K is not None:
            coeffs = resize_modes(coeffs, K)
        return cls(lam, coeffs, grid)

    @classmethod
    def from_theta(cls, lam: float, series: ThetaSeries, grid: SGrid) -> "BracketField":
        """Field constant in s: psi^lam * xi(theta)."""
        return cls(lam, np.repeat(series.coeffs[:, None], grid.N, axis=1), grid)

    @classmethod
    def zeros(cls, lam: float, K: int, grid: SGrid) -> "BracketField":
        return cls(lam, np.zeros((2 * K + 1, grid.N), dtype=complex), grid)

    @classmethod
    def reference(cls, K: int, grid: SGrid) -> "BracketField":
        """a = psi^{1/2}, the rigid rotation psi = x^2 + y^2."""
        h = np.zeros((2 * K + 1, grid.N), dtype=complex)
        h[K] = 1.0
        return cls(0.5, h, grid)


def decompose_leading(F: BracketField) -> Tuple[ThetaSeries, BracketField]:
    """Split F = v(theta) psi^lam + w with v_k = h_k(0)."""
    v = F.leading()
    w = BracketField(F.lam, F.h - F.h[:, :1], F.grid)
    return v, w


# --- Weighted norms ---
def _origin_limit(g: np.ndarray, e: float, grid: SGrid) -> np.ndarray:
    """Limit of 2 s^e |g|^2 at s = 0 per mode, +inf where it diverges."""
    if e > 0:
        return np.zeros(g.shape[0])
    scale = np.maximum(1.0, np.max(np.abs(g), axis=1))
    limit = np.zeros(g.shape[0])
    undecided = np.ones(g.shape[0], dtype=bool)
    deriv = g
    for j in range(int(math.ceil(-e / 2.0)) + 1):
        d_j = deriv[:, 0] / math.factorial(j)
        expo = e + 2.0 * j
        significant = undecided & (np.abs(d_j) > TAYLOR_TOL * scale)
        if expo < -1e-12:
            limit[significant] = np.inf
        elif abs(expo) <= 1e-12:
            limit[significant] = 2.0 * np.abs(d_j[significant]) ** 2
        undecided &= ~significant
        if expo > 0 or not undecided.any():
            break
        deriv = grid.derivative(deriv)
    return limit


def _weighted_integrals(g: np.ndarray, e: float, grid: SGrid, cap: float) -> np.ndarray:
    """Per-mode Clenshaw-Curtis integral of 2 s^e |g|^2 over [0, 1]."""
    s = grid.nodes
    integrand = np.empty(g.shape)
    integrand[:, 1:] = 2.0 * s[1:] ** e * np.abs(g[:, 1:]) ** 2
    integrand[:, 0] = _origin_limit(g, e, grid)
    if not np.all(np.isfinite(integrand)) or np.max(integrand) > cap:
        return np.full(g.shape[0], np.inf)
    return integrand @ grid.weights


def kondratev_norm(w: BracketField, gamma: float, m: int, sigma: float = 0.0, cap: float = NORM_CAP) -> float:
    """K^m_gamma norm, sum over p+q <= m of ||psi^{p-gamma} d_psi^p d_theta^q w||^2.

    psi^p d_psi^p = E(E-1)...(E-p+1) with E = psi d_psi, and E(psi^lam h) = psi^lam (s/2 d_s + lam) h,
    so every term is evaluated on the smooth factor h. dpsi = 2s ds gives the weight 2 s^{4(lam-gamma)+1}.

    Returns:
        The norm, or +inf when the weighted integrand diverges at s = 0 or exceeds the cap.
    """
    if not 0 <= m <= MAX_NORM_ORDER:
        raise GridError(f"kondratev_norm supports 0 <= m <= {MAX_NORM_ORDER}, got {m}")
    grid = w.grid
    k = w.wavenumbers.astype(float)
    e = 4.0 * (w.lam - gamma) + 1.0
    mode_weight = np.exp(2.0 * sigma * np.abs(k))
    total = 0.0
    g = w.h
    for p in range(m + 1):
        if p > 0:
            g = grid.euler(g) + (w.lam - (p - 1)) * g
        integrals = _weighted_integrals(g, e, grid, cap)
        if not np.all(np.isfinite(integrals)):
            return float("inf")
        for q in range(m - p + 1):
            total += float(np.sum(mode_weight * k ** (2 * q) * integrals))
    return math.sqrt(2.0 * np.pi * total)


def x_sigma_norm(f: ThetaSeries, sigma: float, m: float) -> float:
    """sqrt(sum (1+k^2)^m e^{2 sigma |k|} |c_k|^2); m may be half-integer."""
    if sigma < 0:
        raise GridError(f"sigma must be non-negative, got {sigma}")
    k = f.wavenumbers.astype(float)
    weight = (1.0 + k**2) ** m * np.exp(2.0 * sigma * np.abs(k))
    return math.sqrt(float(np.sum(weight * np.abs(f.coeffs) ** 2)))


def j_norm(F: BracketField, gamma: float, m: int, sigma: float = 0.0) -> float:
    """Norm of v psi^lam + w in X^m_sigma (+) K^{m,sigma}_{lam+gamma}."""
    v, w = decompose_leading(F)
    return math.hypot(x_sigma_norm(v, sigma, m), kondratev_norm(w, F.lam + gamma, m, sigma))


def analyticity_width(f: ThetaSeries, floor: float = AMPLITUDE_FLOOR) -> WidthEstimate:
    """Fit -log|c_k| ~ width*k + beta*log(1+k) + c over the significant modes k >= 1.

    Raises:
        UndefinedWidthError: If fewer than 8 modes exceed the amplitude floor.
    """
    K = f.K
    k = np.arange(1, K + 1)
    amp = np.maximum(np.abs(f.coeffs[K + 1:]), np.abs(f.coeffs[K - 1::-1]))
    usable = amp > floor
    if np.count_nonzero(usable) < MIN_WIDTH_POINTS:
        raise UndefinedWidthError(
            f"Only {np.count_nonzero(usable)} coefficients above {floor:g}; need {MIN_WIDTH_POINTS}"
        )
    kk = k[usable].astype(float)
    A = np.column_stack([kk, np.log1p(kk), np.ones_like(kk)])
    coef, *_ = np.linalg.lstsq(A, -np.log(amp[usable]), rcond=None)
    return WidthEstimate(width=float(coef[0]), k_min=int(kk.min()), k_max=int(kk.max()), beta=float(coef[1]))

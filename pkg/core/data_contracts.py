from dataclasses import dataclass, field
from typing import List, Dict, Optional, Any, Tuple, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from core.spectral_core import BracketField, ThetaSeries


class StagcalcError(Exception):
    """Base class for every error raised by stagcalc."""


# --- Input side (exit code 1) ---
class DataLoadError(StagcalcError):
    """Raised when a problem, solution or config file is missing or malformed."""


class GridError(StagcalcError):
    """Raised for inconsistent sample counts, orders or resolutions."""


class ConfigError(StagcalcError):
    """Raised when SolveConfig violates a hard constraint."""


class BoundaryError(StagcalcError):
    """Raised when a boundary curve is not a positive polar graph."""


# --- Numerical side (exit code 2) ---
class DegeneracyError(StagcalcError):
    """A bracket [psi^-1/2 a] or [psi^1/2 a_psi] came too close to zero."""


class WindingError(StagcalcError):
    """The mapped boundary curve does not wind once around the origin."""


class CokernelViolationError(StagcalcError):
    """Leading-term data has e^{+-2i theta} components beyond tolerance."""


class MonotonicityError(StagcalcError):
    """A radial profile s*h0(s) is not strictly increasing."""


class UndefinedWidthError(StagcalcError):
    """Too few significant Fourier coefficients to fit a decay rate."""


class IncompatibilityRangeError(StagcalcError):
    """The compatibility scale left the admissible bracket."""


class ConvergenceError(StagcalcError):
    """Newton iteration failed; the partial report is attached."""

    def __init__(self, message: str, report: Optional["SolveReport"] = None):
        super().__init__(message)
        self.report = report


INPUT_ERRORS = (DataLoadError, GridError, ConfigError, BoundaryError)
NUMERICAL_ERRORS = (
    ConvergenceError,
    DegeneracyError,
    WindingError,
    CokernelViolationError,
    MonotonicityError,
    IncompatibilityRangeError,
)


@dataclass
class WidthEstimate:
    """Fitted analyticity width of a Fourier series."""

    width: float
    k_min: int
    k_max: int
    beta: float = 0.0  # algebraic prefactor exponent of the fit


@dataclass(eq=False)
class FlowLineFamily:
    """Solution triple: flow lines r = R * a(psi, theta) about the stagnation point p."""

    R: float
    p: Tuple[float, float]
    a: "BracketField"


@dataclass(eq=False)
class ResidualPair:
    """Interior and boundary residuals of (Xi(a) - F, B)."""

    interior: "BracketField"  # lambda = 0, |k|=2 leading modes projected out
    boundary: "ThetaSeries"
    cokernel_moments: Tuple[complex, complex]
    interior_sup: float = 0.0  # measured before projection
    boundary_sup: float = 0.0

    @property
    def measure(self) -> float:
        return max(self.interior_sup, self.boundary_sup)

    @property
    def cokernel_magnitude(self) -> float:
        return float(max(abs(self.cokernel_moments[0]), abs(self.cokernel_moments[1])))


@dataclass(eq=False)
class LinearData:
    """Data (f, g) of the L-form linear problem; f has lambda = 1/2."""

    f: "BracketField"
    g: "ThetaSeries"


@dataclass(eq=False)
class LinearSolution:
    R: complex
    p: Tuple[complex, complex]
    u: "BracketField"
    homogeneous_coeffs: np.ndarray  # c_k indexed like ThetaSeries, zero for |k| < 2
    resonance: Optional["BracketField"] = None  # L u - f; nonzero only for s^{|k|-2} data with |k| >= 3


@dataclass(eq=False)
class Increment:
    """Newton correction subtracted from a FlowLineFamily."""

    dR: float
    dp: Tuple[float, float]
    dh: np.ndarray  # mode coefficients of the smooth factor of delta a


@dataclass(eq=False)
class SolveReport:
    solution: FlowLineFamily
    iterations: int
    converged: bool
    residual_history: List[Tuple[float, float, float]] = field(default_factory=list)
    contraction_ratios: List[float] = field(default_factory=list)
    analyticity_width_of_trace: float = float("inf")
    j_norm: float = 0.0  # J-norm of a - psi^1/2
    r_distance: float = 0.0  # |R - 1|
    p_norm: float = 0.0
    continuation: List[Dict[str, Any]] = field(default_factory=list)
    message: str = ""
    tolerance: float = 0.0  # residual tolerance actually applied


@dataclass
class PropertyReport:
    """Outcome of one numerical property check."""

    name: str
    seed: int
    samples: int
    worst_ratio: float
    bound: float
    slack: float = 0.0
    passed: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.worst_ratio <= self.bound * (1.0 + self.slack))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "seed": self.seed,
            "samples": self.samples,
            "worst_ratio": self.worst_ratio,
            "bound": self.bound,
            "pass": self.passed,
            "details": self.details,
        }

import logging

import numpy as np

from core.data_contracts import FlowLineFamily, Increment, LinearData, ResidualPair
from core.linear_solver import solve_linear
from core.spectral_core import BracketField, physical_to_modes
from core.stepping.base import StepContext, StepStrategy
from utils.constants import FD_STEP, JACOBIAN_FD, JACOBIAN_FROZEN

logger = logging.getLogger(__name__)


class FrozenReferenceStep(StepStrategy):
    """Solve with the linearization at the rigid rotation, rescaled to the current R.

    Around a = psi^{1/2}: D Xi . delta a = -8 psi^{-1/2} L delta a, and the boundary
    derivative is 2 R^2 (delta R / R + delta p / R . e_r + delta t).
    """

    def name(self) -> str:
        return JACOBIAN_FROZEN

    def compute(self, state: FlowLineFamily, residual: ResidualPair, context: StepContext) -> Increment:
        R = state.R
        f = residual.interior.shift(0.5) * (-0.125)
        g = residual.boundary * (1.0 / (2.0 * R**2))
        sol = solve_linear(LinearData(f, g), context.config.cokernel_tol, resonance_tol=None)
        logger.debug(f"Frozen step resonance defect {np.max(np.abs(sol.resonance.h)):.3e}")
        return Increment(
            dR=R * sol.R.real,
            dp=(R * sol.p[0].real, R * sol.p[1].real),
            dh=sol.u.h,
        )


def pack_state(state: FlowLineFamily) -> np.ndarray:
    """[R, p_x, p_y, h on the (theta, s) grid]."""
    return np.concatenate(([state.R, state.p[0], state.p[1]], state.a.physical().real.ravel()))


def unpack_state(x: np.ndarray, template: FlowLineFamily) -> FlowLineFamily:
    a = template.a
    values = x[3:].reshape(2 * a.K + 1, a.grid.N).astype(complex)
    return FlowLineFamily(float(x[0]), (float(x[1]), float(x[2])),
                          BracketField(a.lam, physical_to_modes(values, real=True), a.grid))


def residual_vector(residual: ResidualPair) -> np.ndarray:
    return np.concatenate((residual.interior.physical().real.ravel(), residual.boundary.samples()))


class FiniteDifferenceStep(StepStrategy):
    """Dense forward-difference Jacobian over every unknown, solved in the least-squares sense.

    Cost grows like (K N)^2 residual evaluations, so this is for small grids and cross-checks.
    """

    def name(self) -> str:
        return JACOBIAN_FD

    def compute(self, state: FlowLineFamily, residual: ResidualPair, context: StepContext) -> Increment:
        x0 = pack_state(state)
        r0 = residual_vector(residual)
        J = np.empty((r0.size, x0.size))
        logger.debug(f"Building finite-difference Jacobian of shape {J.shape}")
        for j in range(x0.size):
            step = FD_STEP * max(1.0, abs(x0[j]))
            x = x0.copy()
            x[j] += step
            J[:, j] = (residual_vector(context.evaluate(unpack_state(x, state))) - r0) / step
        delta, *_ = np.linalg.lstsq(J, r0, rcond=None)
        dh = physical_to_modes(delta[3:].reshape(2 * state.a.K + 1, state.a.grid.N).astype(complex), real=True)
        return Increment(dR=float(delta[0]), dp=(float(delta[1]), float(delta[2])), dh=dh)

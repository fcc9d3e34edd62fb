from typing import List, Optional

from core.data_contracts import PropertyReport
from core.diagnostics.base import VerificationSuite
from core.diagnostics.checks import check_cokernel, check_hardy, check_inverse_branches, check_linear_isomorphism
from managers.config_manager import SolveConfig
from utils.constants import (
    BRANCH_K,
    BRANCH_N,
    BRANCH_TRIALS,
    COKERNEL_AMPLITUDE,
    COKERNEL_TRIALS,
    HARDY_ALPHAS,
    HARDY_TRIALS,
    LINEAR_K,
    LINEAR_N,
    LINEAR_TRIALS,
    SUITE_BRANCHES,
    SUITE_COKERNEL,
    SUITE_HARDY,
    SUITE_LINEAR,
)


class HardySuite(VerificationSuite):
    def name(self) -> str:
        return SUITE_HARDY

    def run(self, cfg: SolveConfig, seed: int, trials: Optional[int] = None) -> List[PropertyReport]:
        return [check_hardy(alpha, trials or HARDY_TRIALS, seed) for alpha in HARDY_ALPHAS]


class CokernelSuite(VerificationSuite):
    def name(self) -> str:
        return SUITE_COKERNEL

    def run(self, cfg: SolveConfig, seed: int, trials: Optional[int] = None) -> List[PropertyReport]:
        return [check_cokernel(trials or COKERNEL_TRIALS, COKERNEL_AMPLITUDE, seed)]


class LinearSuite(VerificationSuite):
    def name(self) -> str:
        return SUITE_LINEAR

    def run(self, cfg: SolveConfig, seed: int, trials: Optional[int] = None) -> List[PropertyReport]:
        return [check_linear_isomorphism(trials or LINEAR_TRIALS, cfg.replace(K=LINEAR_K, N=LINEAR_N), seed)]


class BranchesSuite(VerificationSuite):
    def name(self) -> str:
        return SUITE_BRANCHES

    def run(self, cfg: SolveConfig, seed: int, trials: Optional[int] = None) -> List[PropertyReport]:
        return [check_inverse_branches(trials or BRANCH_TRIALS, cfg.gamma, BRANCH_K, BRANCH_N, seed)]

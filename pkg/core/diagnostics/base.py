from abc import ABC, abstractmethod
from typing import List, Optional

from core.data_contracts import PropertyReport
from managers.config_manager import SolveConfig


class VerificationSuite(ABC):
    """Abstract base class for the numerical property suites run by `verify`."""

    @abstractmethod
    def name(self) -> str:
        """Returns the --suite key for this suite (e.g., 'hardy')."""
        pass

    @abstractmethod
    def run(self, cfg: SolveConfig, seed: int, trials: Optional[int] = None) -> List[PropertyReport]:
        """Runs every check of the suite; trials overrides the per-check default."""
        pass

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable

from core.data_contracts import FlowLineFamily, Increment, ResidualPair


@dataclass(eq=False)
class StepContext:
    """What a step strategy may need besides the current iterate."""

    config: Any  # SolveConfig
    evaluate: Callable[[FlowLineFamily], ResidualPair]


class StepStrategy(ABC):
    """Abstract base class for Newton correction strategies."""

    @abstractmethod
    def name(self) -> str:
        """Returns the jacobian_mode key for this strategy (e.g., 'frozen-reference')."""
        pass

    @abstractmethod
    def compute(self, state: FlowLineFamily, residual: ResidualPair, context: StepContext) -> Increment:
        """Returns the correction delta with DF(state) delta ~ residual."""
        pass

from core.diagnostics.suites import (
    HardySuite,
    CokernelSuite,
    LinearSuite,
    BranchesSuite,
)
from utils.constants import SUITE_ALL

SUITES = [
    HardySuite(),
    CokernelSuite(),
    LinearSuite(),
    BranchesSuite(),
]

def get_suites(name: str):
    """Suites selected by a --suite key; 'all' selects every suite, unknown keys give None."""
    if name == SUITE_ALL:
        return list(SUITES)
    for suite in SUITES:
        if suite.name() == name:
            return [suite]
    return None

from core.stepping.methods import (
    FrozenReferenceStep,
    FiniteDifferenceStep,
)

STEP_METHODS = [
    FrozenReferenceStep(),
    FiniteDifferenceStep(),
]

def get_step_method(name: str):
    for method in STEP_METHODS:
        if method.name() == name:
            return method
    return None

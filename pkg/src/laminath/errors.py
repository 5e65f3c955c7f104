"""Error types shared across the package.

Each error carries a stable machine-readable ``code`` used by the CLI for
exit-status mapping and JSON error objects.
"""

from __future__ import annotations


class LaminathError(Exception):
    code = "error"


class InvalidSlope(LaminathError):
    code = "invalid-slope"


class PrecisionExhausted(LaminathError):
    code = "precision-exhausted"


class ParityMismatch(LaminathError):
    code = "parity-mismatch"


class NotBlockShaped(LaminathError):
    code = "not-block-shaped"


class SingularHit(LaminathError):
    code = "singular-hit"

    def __init__(self, message, point=None, step=None):
        super().__init__(message)
        self.point = point
        self.step = step


class ClearanceViolated(LaminathError):
    code = "clearance-violated"


class InvalidGrowthFunction(LaminathError):
    code = "invalid-growth-function"


class DepthInsufficient(LaminathError):
    code = "depth-insufficient"


class InvalidSurface(LaminathError):
    code = "invalid-surface"


class CylinderDecomposition(LaminathError):
    code = "cylinder-decomposition-detected"


class BudgetExhausted(LaminathError):
    code = "budget-exhausted"


# exit-status classes for the CLI
PRECONDITION_ERRORS = (InvalidSlope, ParityMismatch, NotBlockShaped,
                       ClearanceViolated, InvalidGrowthFunction,
                       InvalidSurface, SingularHit)
EXHAUSTION_ERRORS = (PrecisionExhausted, DepthInsufficient, BudgetExhausted,
                     CylinderDecomposition)

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class BellforgeError(Exception):
    """Base class for all errors raised by this package."""


class ScenarioMismatch(BellforgeError):
    """Objects defined on different scenarios were combined."""


class InvalidTensor(BellforgeError):
    """Tensor data violates a structural requirement (shape, sign, normalisation)."""


class DegenerateFunctional(BellforgeError):
    """Functional is constant on every setting, so no game normalisation exists."""


class DegenerateScale(BellforgeError):
    """Equivalence scale is undetermined (functional lies in the invariance span)."""


class Unsupported(BellforgeError):
    """Requested operation is outside the implemented domain."""


class BudgetExceeded(BellforgeError):
    """Enumeration budget exhausted before the computation finished.

    Carries the best result found so far (flagged inexact) in ``partial``
    when one exists.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class InvalidMargin(BellforgeError):
    """Margin or probability argument outside its valid range."""


class VacuousBound(BellforgeError):
    """Requested bound cannot certify anything for these parameters."""


class InternalError(BellforgeError):
    """A solver self-check failed; indicates a bug, not bad input."""

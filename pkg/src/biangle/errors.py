"""Exception types shared by all modules."""

from __future__ import annotations


class ParameterDomainError(ValueError):
    """Exponents or other parameters outside their admissible range."""


class DomainError(ValueError):
    """A point lies outside the domain on which a function is defined."""


class ContractError(ValueError):
    """A documented precondition (e.g. quadrature degree) is violated."""


class UnsupportedParameterError(ValueError):
    """The exact path does not support the requested parameters."""


class IndexRangeError(IndexError):
    """Polynomial index or degree outside the available range."""


class ResolutionError(RuntimeError):
    """A discretization did not stabilize under refinement."""


class ConditioningError(RuntimeError):
    """A linear algebra step became too ill-conditioned to trust."""


class NumericError(RuntimeError):
    """Generic numerical failure (eigen-solver, non-finite values)."""


class ToleranceError(RuntimeError):
    """Adaptive integration ran out of budget before reaching the tolerance.

    The best available estimate and its error estimate are attached.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class EvaluationError(NumericError):
    """An integrand returned a non-finite value at a quadrature node."""

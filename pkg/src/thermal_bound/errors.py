"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(ArithmeticError):
    """An iterative method failed to converge.

    ``partial`` carries whatever the method had when it gave up (a bracket,
    a partial integral), so callers can report it.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class EvaluatorError(ArithmeticError):
    """A user-supplied evaluator returned a non-finite value."""

    def __init__(self, message: str, omega: float):
        super().__init__(f"{message} (at omega={omega!r})")
        self.omega = omega

"""
errors.py
====================================
Exceptions raised by the SasakiLift modules.
All of them derive from ValueError, so callers that only guard against bad input keep working.
"""


class GeometryError(ValueError):
    """Base class for every error raised by the package."""


class SingularPointError(GeometryError):
    """A jet operation hit a singular point (division by zero, log/sqrt outside its domain)."""


class DomainError(GeometryError):
    """A point lies outside the admissible region (or the guard band) of an evaluator."""


class GaugeSingularityError(GeometryError):
    """The gauge function f vanishes at the evaluation point."""


class ExpressionError(GeometryError):
    """Syntax error or unknown identifier in a potential expression."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f'{message} (at position {position})'
        super().__init__(message)
        self.position = position


class SolverError(GeometryError):
    """A solver failed; `history` holds the residual norms, `location` the point of failure if any."""

    def __init__(self, message, history=None, location=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.location = location


class ConfigError(GeometryError):
    """The run configuration could not be parsed or validated."""


class HypothesisWarning(UserWarning):
    """A solver hypothesis is not met; the computation goes on and the result is only reported."""

"""Exception hierarchy.

Validation problems derive from ``ValueError``; numerical failures derive from
``NumericalError`` so callers (and the CLI exit codes) can tell them apart.
"""


class ValidationError(ValueError):
    """Input violates a model or configuration invariant."""


class InvalidTemperatureError(ValidationError):
    pass


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its target accuracy."""


class PoleCollisionError(NumericalError):
    pass


class QuadratureError(NumericalError):
    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class EigenSolverError(NumericalError):
    pass


class UnresolvedSpectrumError(NumericalError):
    pass

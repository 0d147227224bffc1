"""Exception types raised across the package."""


class PTQuditError(Exception):
    """Base class for all package errors."""


class DimensionError(PTQuditError, ValueError):
    """Matrix or vector has the wrong shape."""


class InvalidValueError(PTQuditError, ValueError):
    """Input contains NaN or Inf entries."""


class DomainError(PTQuditError, ValueError):
    """Argument lies outside the domain an operation accepts."""


class NumericalFailure(PTQuditError, ArithmeticError):
    """A numerical procedure did not converge or lost all precision."""

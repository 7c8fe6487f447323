"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code (see :mod:`wfabounds.cli`).
"""


class WFAError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class DomainError(WFAError, ValueError):
    """Input outside the domain of an operation (bad symbol, shape mismatch, ...)."""

    exit_code = 2


class ResourceError(WFAError, RuntimeError):
    """A size guard was exceeded (enumeration too large, walk too long, ...)."""

    exit_code = 3


class NumericError(WFAError, ArithmeticError):
    """Non-finite values or loss of numerical accuracy."""

    exit_code = 4


class ConditioningError(NumericError):
    """Ill-conditioned linear algebra (near-singular matrix, failed solve)."""

class RicError(Exception):
    """Base class for every failure the command line reports with an exit code"""

    exit_code = 1


class DomainError(RicError, ValueError):
    """Inputs outside the region where a quantity is defined"""

    exit_code = 2


class ConstraintViolation(DomainError):
    """The implicit equation has no root on its constrained side"""


class SolverError(RicError, ArithmeticError):
    """A root or optimum search failed to converge"""

    exit_code = 3


class GuardError(RicError):
    """An enumeration would exceed its configured size guard"""

    exit_code = 4

    def __init__(self, message, count=None, limit=None):
        super().__init__(message)
        self.count = count
        self.limit = limit


class OutputError(RicError, OSError):
    """Results could not be written"""

    exit_code = 5


def require(condition, message):
    """Raise DomainError with message unless condition holds"""
    if not condition:
        raise DomainError(message)

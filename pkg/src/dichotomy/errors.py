"""Exception types shared across the package."""


class DichotomyError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DichotomyError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(DichotomyError):
    """A request exceeds an enumeration or table-size cap."""


class SingularSystemError(DichotomyError, ArithmeticError):
    """A denominator of a closed-form solution degenerates."""


class ConvergenceError(DichotomyError, ArithmeticError):
    """An iterative scheme failed to reach its tolerance."""


class InvariantViolation(DichotomyError):
    """A mathematical guarantee of the library was observed to fail."""

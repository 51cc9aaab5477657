"""Exception hierarchy shared by all modules."""


class IgaBoundError(Exception):
    """Base class for library errors."""


class InvalidArgument(IgaBoundError, ValueError):
    pass


class OutOfDomain(IgaBoundError, ValueError):
    pass


class SpaceTooSmall(IgaBoundError, ValueError):
    pass


class InvalidSpec(IgaBoundError, ValueError):
    pass


class InsufficientData(IgaBoundError, ValueError):
    pass


class MatrixNotSPD(IgaBoundError, ArithmeticError):
    pass


class NoConvergence(IgaBoundError, RuntimeError):
    """Raised when the iterative eigensolver exhausts its budget.

    ``residuals`` holds the relative residuals reached for the pairs that
    were available when iteration stopped (may be empty).
    """

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = tuple(residuals)

"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-range user input."""


class DomainError(ValueError):
    """Argument outside the mathematical domain (e.g. a non-PD matrix)."""


class DegeneracyError(ArithmeticError):
    """Numerical degeneracy encountered while updating the estimate."""

    def __init__(self, message, column=None, iteration=None):
        super().__init__(message)
        self.column = column
        self.iteration = iteration

"""Exception types shared by every module."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class InvariantError(AssertionError):
    """An internal cross-check failed; the result must not be trusted."""


class InconsistentSystemError(DomainError):
    """A linear system has no solution."""

    def __init__(self, message: str, row=None):
        super().__init__(message)
        self.row = row

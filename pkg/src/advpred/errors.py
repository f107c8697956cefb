"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition or invariant."""


class SolverFailureError(RuntimeError):
    """A numerical solver gave up; ``incumbent`` holds the best solution found."""

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed the configured budget."""


class DataFormatError(ValueError):
    """A data file does not follow its documented format."""


class ConfigError(ValueError):
    """A run configuration is missing, malformed, or inconsistent."""

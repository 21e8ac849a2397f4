"""Exception hierarchy.  The CLI maps these onto exit codes."""


class SubgeoError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InputError(SubgeoError, ValueError):
    """Invalid arguments or malformed input data."""

    exit_code = 2


class PreconditionError(InputError):
    """An operation was called outside its documented domain."""


class FormatError(InputError):
    """A point file could not be parsed."""


class BudgetError(SubgeoError):
    """A requested repetition/branch count exceeds the configured budget."""

    exit_code = 3

    def __init__(self, message: str, required: int, budget: int):
        super().__init__(message)
        self.required = required
        self.budget = budget


class InfeasibleError(SubgeoError):
    """No feasible shape exists for the given center (e.g. infinite size)."""

    exit_code = 4

"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class BudgetExceededError(RuntimeError):
    """A computation would exceed (or did exceed) its work budget.

    ``best`` carries the best available estimate when one exists, and
    ``cost`` the estimated amount of work the request would need.
    """

    def __init__(self, message, best=None, cost=None):
        super().__init__(message)
        self.best = best
        self.cost = cost


class UnsupportedError(ValueError):
    """The operation is not available for this input kind or size."""


class InsufficientDataError(ValueError):
    """Too few usable points for a fit."""

"""Shared exception types."""


class ConfigurationError(ValueError):
    """Raised when dimensions, grids or option values are inconsistent."""


class NonConvergenceError(RuntimeError):
    """Raised when an iterative solve exhausts its iteration budget.

    Carries the best iterate seen so far in ``best`` and, when available,
    the trace collected up to the failure in ``trace``.
    """

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace

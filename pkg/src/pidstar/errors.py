"""Exception types shared across the package."""


class PIDError(Exception):
    """Base class for all errors raised by pidstar."""


class InputError(PIDError, ValueError):
    """Malformed or inconsistent user input."""


class ResourceError(PIDError, RuntimeError):
    """A configured resource cap (e.g. the vertex cap) was exceeded.

    ``partial`` optionally carries a best-so-far result that is *not*
    certified optimal.
    """

    def __init__(self, message, cap=None, partial=None):
        super().__init__(message)
        self.cap = cap
        self.partial = partial


class NonConvergenceError(PIDError, RuntimeError):
    """An iterative solver hit its iteration limit before certifying optimality."""

    def __init__(self, message, value=None, gap=None, iterations=None):
        super().__init__(message)
        self.value = value
        self.gap = gap
        self.iterations = iterations


class InvariantError(PIDError, AssertionError):
    """An internal invariant was violated (indicates a bug, not bad input)."""

"""Exception hierarchy shared by every kobalab module."""


class KobalabError(Exception):
    """Base class for library errors."""


class PreconditionError(KobalabError, ValueError):
    """An input violates an operation's precondition (outside the domain, bad shape, ...)."""


class NumericError(KobalabError, ArithmeticError):
    """A numerical invariant broke down (degenerate gradient, conditioning, overflow)."""


class SearchFailure(KobalabError, RuntimeError):
    """A bounded search ended without producing the requested object."""


class DegenerateOptimizationError(SearchFailure):
    """Optimization produced no acceptable candidate.

    The ``diagnostics`` mapping carries whatever was computed on the way.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

"""Exception hierarchy shared by all lattab modules."""


class LattabError(Exception):
    """Base class for every error raised by lattab."""


class InvalidParameters(LattabError, ValueError):
    """Lattice or potential parameters outside their admissible domain."""


class NonPositiveArgument(LattabError, ValueError):
    """A function defined on (0, inf) was evaluated at r <= 0."""


class DegenerateBasis(LattabError, ValueError):
    """Basis vectors are (numerically) linearly dependent."""


class NotConvergent(LattabError):
    """The requested lattice sum does not converge absolutely."""


class Budget(LattabError):
    """The point budget was exhausted before reaching the target tolerance.

    The partially converged :class:`~lattab.sums.SumResult` is kept on
    ``partial`` so callers can report diagnostics.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PoleAt3Halves(LattabError, ValueError):
    """Epstein zeta evaluated at its pole s = 3/2."""


class NotCritical(LattabError):
    """Classification requested away from a critical point."""


class NoBracket(LattabError):
    """No sign change of the criterion inside the scan window."""

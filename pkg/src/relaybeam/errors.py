"""Exception hierarchy shared across the solvers.

The CLI maps InputError to exit code 3 and ConvergenceError to exit code 2;
everything else is a plain failure.
"""


class RelayBeamError(Exception):
    """Base class for all library errors."""


class InputError(RelayBeamError):
    """Invalid user-supplied data: bad shapes, non-Hermitian matrices,
    negative variances, malformed scenario files."""


class DispatchError(InputError):
    """A solver restricted to a structural subclass (e.g. diagonal R, Q)
    received an instance outside it."""


class ScopeError(InputError):
    """Operation invoked outside its proven scope (e.g. rank-one
    decomposition with more than three relays)."""


class SingularityError(RelayBeamError):
    """A matrix that must be positive definite is numerically singular."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class DegenerateSpectrumError(RelayBeamError):
    """Eigenvalue derivative requested at a (nearly) repeated eigenvalue."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class ConvergenceError(RelayBeamError):
    """Iteration budget exhausted or a line search stalled.

    ``best`` carries the most recent iterate so callers can inspect or
    salvage it.
    """

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace


class ModelError(RelayBeamError):
    """Problem detected as infeasible or unbounded."""

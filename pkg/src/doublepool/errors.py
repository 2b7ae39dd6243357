"""Exception hierarchy shared by the planning and simulation modules."""


class PoolingError(Exception):
    """Base class for every error raised by doublepool."""


class DomainError(PoolingError, ValueError):
    """An argument lies outside the domain of the model (e.g. p <= 0)."""


class NoInteriorOptimumError(PoolingError):
    """The cost derivative has no negative-to-positive crossing in the bracket."""


class RangeError(PoolingError, ValueError):
    """A requested target value cannot be reached on the searched interval."""


class NotAttainedError(PoolingError):
    """A threshold is never met on the evaluation grid."""

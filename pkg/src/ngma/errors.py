"""Exception types raised by the ngma package."""


class NGMAError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpec(NGMAError, ValueError):
    """A scenario, channel spec or configuration violates its invariants."""


class DimensionError(NGMAError, ValueError):
    """Vector or matrix dimensions do not match."""


class InvalidUser(NGMAError, IndexError):
    """User index out of range or not covered by a grouping/layering."""


class NotCoClustered(NGMAError, ValueError):
    """Two users expected in the same cluster live in different clusters."""


class InvalidClusterSize(NGMAError, ValueError):
    """A cluster does not have the size the scheme requires."""


class Overloaded(NGMAError, ValueError):
    """Not enough spatial degrees of freedom for the requested nulling."""


class RankDeficient(NGMAError, ValueError):
    """Channel matrix is numerically rank deficient."""

    def __init__(self, message, singular_value=None):
        super().__init__(message)
        self.singular_value = singular_value


class ZeroChannel(NGMAError, ValueError):
    """A channel vector is identically zero."""


class SearchTooLarge(NGMAError):
    """The enumerated search space exceeds the configured cap."""

    def __init__(self, message, count=None, cap=None):
        super().__init__(message)
        self.count = count
        self.cap = cap


class Infeasible(NGMAError):
    """No configuration satisfies the SIC constraints.

    ``result`` holds the least-violating configuration (``feasible=False``)
    when one was evaluated, and ``slack`` its worst SIC margin in bit/s/Hz.
    """

    def __init__(self, message, result=None, slack=None):
        super().__init__(message)
        self.result = result
        self.slack = slack

"""Exception hierarchy.

The CLI maps each class to its own exit code, so callers can tell a bad
config from a bad signal from a sequence that fails the admissibility test.
"""


class DfexError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DfexError, ValueError):
    """A configuration document is malformed or references unknown names."""


class ShapeError(DfexError, ValueError):
    """Signals or filters whose shapes do not fit together."""


class PreconditionError(DfexError, ValueError):
    """An operation was called outside its domain (divisibility, grid points, ...)."""


class GridEndpointError(PreconditionError):
    """A cartoon interval endpoint falls on the sampling grid."""


class InadmissibleError(DfexError, ValueError):
    """A module-sequence violates max{B, B R^2 L^2} <= 1 where the check requires it."""

"""Exception hierarchy.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``NumericError``
subclasses -> 3, ``OSError`` -> 4.
"""


class TsqError(Exception):
    pass


class ConfigError(TsqError, ValueError):
    """Invalid scenario configuration."""


class ParameterError(TsqError, ValueError):
    """Invalid argument to a numeric routine."""


class ShapeError(TsqError, ValueError):
    """Grid or dimension mismatch between operands."""


class NumericError(TsqError):
    """A computation produced or met unusable numbers."""


class DomainError(NumericError, ValueError):
    """Non-finite value, or evaluation outside a state's domain."""


class TruncationError(NumericError):
    """The grid does not capture the support of the fields involved."""


class ResolutionError(NumericError, ValueError):
    """A feature is too narrow to be resolved by the grid spacing."""


class TopologyError(TsqError, ValueError):
    """Malformed interferometer graph."""


class PathError(TsqError, ValueError):
    """Operation requested on a closed or invalid path."""

"""Exception types shared across the toolkit."""


class HdmdcError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(HdmdcError):
    """A channel-role schema does not match the data."""


class FormatError(HdmdcError):
    """A file violates its expected format."""


class DataError(HdmdcError):
    """A data value is unusable (NaN, non-numeric, ...)."""


class DegenerateDataError(HdmdcError):
    """A signal lacks the variation an operation requires."""


class ParameterError(HdmdcError, ValueError):
    """An argument is outside an operation's admissible range."""


class WindowError(ParameterError):
    """A requested window does not fit the available samples."""


class HistoryError(ParameterError):
    """Not enough past samples to build the delay-augmented vectors."""


class InputError(ParameterError):
    """Forcing samples are missing for the requested horizon."""


class ShapeError(HdmdcError, ValueError):
    """Array dimensions do not match the model."""


class RankDeficiencyError(HdmdcError):
    """The unregularized normal equations are numerically singular."""


class EnsembleError(HdmdcError):
    """An ensemble is inconsistent or too degraded to summarize."""


class GridMismatchError(HdmdcError, ValueError):
    """Gridded densities do not share a common evaluation grid."""


class SweepError(HdmdcError):
    """No usable configuration came out of a sweep."""


class GeneratorError(HdmdcError):
    """A synthetic system is unstable or its simulation diverged."""


class ConfigError(HdmdcError):
    """A job configuration or manifest is invalid."""

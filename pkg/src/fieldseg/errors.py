"""Error hierarchy shared across the package.

ConfigError means the caller asked for something invalid (bad sweep fraction,
out-of-range band index, sample size larger than the population). DataError
means the inputs on disk are unusable (corrupt stack, malformed maskset,
mismatched dimensions). The CLI maps these to exit codes 2 and 3.
"""


class FieldsegError(Exception):
    """Base class for all package errors."""


class ConfigError(FieldsegError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class DataError(FieldsegError):
    """Unreadable, malformed, or inconsistent input data (CLI exit code 3)."""


class UnusableTileError(DataError):
    """A tile has no usable content (e.g. no valid NDVI timestep)."""


class MaskFormatError(DataError):
    """A maskset file violates the interchange schema."""

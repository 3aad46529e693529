"""Exception types shared across the package.

The CLI maps these onto exit codes: argument/dimension problems exit with 2,
data and file format problems with 3, numeric failures with 4.
"""


class SpixelError(Exception):
    """Base class for package-specific errors."""


class DimensionError(SpixelError, ValueError):
    """A shape, size, or index constraint was violated."""


class DataFormatError(SpixelError):
    """A file (IDX, cache, checkpoint, mask) is malformed or truncated."""


class NumericError(SpixelError):
    """A computation produced non-finite values."""

"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, anything else exits 3 as an internal error.
"""


class CondtreeError(Exception):
    """Base class for all package errors."""


class DataError(CondtreeError):
    """Unreadable, malformed, or semantically invalid input data."""


class ModelFormatError(DataError):
    """A serialized model document failed validation."""

"""Exception types shared across the toolkit."""


class EmbalignError(Exception):
    """Base class for all toolkit errors."""


class FormatError(EmbalignError):
    """File does not conform to the expected on-disk format."""


class ConsistencyError(EmbalignError):
    """Shapes, row counts, or dimensions disagree."""


class DataError(EmbalignError):
    """Non-finite or otherwise invalid numeric data."""


class IoError(EmbalignError):
    """Read/write failure."""


class LabelConflictError(EmbalignError):
    """The same image id carries different identity labels."""


class EmptyIntersectionError(EmbalignError):
    """Two embedding sets share no image ids."""


class DegenerateRowError(EmbalignError):
    """A row has zero norm where a direction is required."""

    def __init__(self, row_index, message=None):
        self.row_index = row_index
        super().__init__(message or f"zero-norm row at index {row_index}")


class DegenerateDataError(EmbalignError):
    """Too few identities (or rows) for the requested operation."""


class NumericalError(EmbalignError):
    """A numerical routine (SVD, factorization) failed to converge."""


class ArgumentError(EmbalignError):
    """Invalid argument value."""


class ProtocolError(EmbalignError):
    """Evaluation protocol preconditions violated (e.g. single-class scores)."""

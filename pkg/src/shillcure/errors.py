"""Exception hierarchy shared by every stage."""


class ShillCureError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ShillCureError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class DataError(ShillCureError):
    """Input data is malformed or inconsistent."""


class SchemaError(DataError):
    """A CSV header does not match the expected column layout."""


class ParseError(DataError):
    """A data row cannot be parsed; ``row`` is the 1-based file line."""

    def __init__(self, row, message):
        super().__init__(f"row {row}: {message}")
        self.row = row


class EmptyDatasetError(DataError):
    """Nothing survived preprocessing."""


class ConsistencyError(DataError):
    """Two artifacts disagree (unknown auction, missing assignment, ...)."""

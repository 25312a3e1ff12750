"""Exception hierarchy shared by all citecore modules."""
from __future__ import annotations


class CitecoreError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CitecoreError, ValueError):
    """An argument lies outside the domain of the requested function."""


class DegenerateComparisonError(CitecoreError, ValueError):
    """Two point-mass distributions with the same location cannot be ordered."""


class InvariantError(CitecoreError, ValueError):
    """A record violates a documented data invariant."""


class ParseError(CitecoreError, ValueError):
    """A malformed input file. Carries the file position of the problem."""

    def __init__(self, path, line: int, column: str | None, reason: str):
        self.path = str(path)
        self.line = line
        self.column = column
        self.reason = reason
        where = f"{self.path}:{line}"
        if column:
            where += f" [{column}]"
        super().__init__(f"{where}: {reason}")


class DuplicateKeyError(ParseError):
    pass


class NegativeCitationError(ParseError):
    pass


class SchemaError(ParseError):
    pass


class RecordError(ParseError, InvariantError):
    """A file row parsed fine but violates a record invariant."""

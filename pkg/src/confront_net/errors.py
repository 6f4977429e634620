"""Exception hierarchy.

Everything user-facing derives from ConfrontNetError so the CLI can map
any data problem to a single exit code. Loader errors carry enough
context (file, line) to locate the offending record.
"""

from __future__ import annotations


class ConfrontNetError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRecord(ConfrontNetError):
    """A record violates the schema (bad enum value, bad number, missing field)."""

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None) -> None:
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class DuplicateId(ConfrontNetError):
    """Two records share an identifier that must be unique."""


class DanglingEndpoint(ConfrontNetError):
    """A relation or segment references an object id that does not exist."""


class UnknownRawType(ConfrontNetError):
    """A relation's raw type is not in the 42-entry vocabulary."""


class UnmappableType(ConfrontNetError):
    """A raw type has no normalized form (it denotes a merge, not an edge)."""


class ConflictingMerge(ConfrontNetError):
    """Equality-linked objects disagree on their kind."""


class MissingLength(ConfrontNetError):
    """A street must be ranked by length but has none recorded."""


class MissingSegments(ConfrontNetError):
    """A street must be split but has no segment decomposition."""


class EmptyResult(ConfrontNetError):
    """A filter removed every vertex."""


class NoFinitePairs(ConfrontNetError):
    """No connected vertex pair exists, so the diameter is undefined."""


class InsufficientCoordinates(ConfrontNetError):
    """Fewer than two located vertices; spatial statistics are undefined."""


class UncoveredVertex(ConfrontNetError):
    """A partition is missing an assignment for some graph vertex."""

"""Exception types shared across the package."""

from __future__ import annotations


class EpsGraphError(Exception):
    """Base class for all package errors."""


class InvalidInput(EpsGraphError, ValueError):
    """Caller violated an operation precondition."""


class ParseError(EpsGraphError, ValueError):
    """Malformed dataset, config, or graph file.

    ``offset`` carries a byte offset (binary formats) or line number (text
    formats) when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConsistencyError(EpsGraphError, RuntimeError):
    """Internal invariant broken; signals an algorithm bug, not bad input."""


class GuardExceeded(EpsGraphError, ValueError):
    """A desk-scale guard (e.g. brute-force size cap) was exceeded."""


class CommError(EpsGraphError, RuntimeError):
    """Collective contract violation in the simulated communicator."""

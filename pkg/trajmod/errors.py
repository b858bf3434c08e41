"""Exception hierarchy shared by every trajmod module."""

from __future__ import annotations


class TrajmodError(Exception):
    """Base class for all errors raised by trajmod."""


class DataFormatError(TrajmodError, ValueError):
    """A data file is missing, malformed, or inconsistent with the network.

    Line numbers are 1-based physical lines (the CSV header is line 1).
    """

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        self.message = message
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class ValidationError(TrajmodError, ValueError):
    """An in-memory object violates an invariant or a precondition."""


class GeneratorError(TrajmodError):
    """The synthetic generator exhausted its retries."""

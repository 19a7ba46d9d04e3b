"""Exception types shared across the package."""

from __future__ import annotations


class SparseBenchError(Exception):
    """Base class for every error raised by this package."""


class BoundsError(SparseBenchError):
    """An index lies outside the matrix or tile it refers to."""


class ShapeError(SparseBenchError):
    """Operands have incompatible shapes or lengths."""


class ConfigError(SparseBenchError):
    """A parameter or configuration value violates its contract."""


class EmptyInputError(SparseBenchError):
    """An operation that needs at least one element received none."""


class CorruptEncodingError(SparseBenchError):
    """An encoded stream is internally inconsistent; names the bad array."""


class UnsupportedFormatError(SparseBenchError):
    """A format name or file qualifier outside the supported set."""


class ParseError(SparseBenchError):
    """A text input could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VerificationError(SparseBenchError):
    """A computed result disagrees with its reference beyond tolerance."""

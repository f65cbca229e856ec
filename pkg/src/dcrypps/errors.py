"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DcryppsError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DcryppsError):
    """Syntax or structural error in a text input, with a source location."""

    def __init__(self, message: str, file: str = "<input>", line: int = 0, column: int = 0):
        super().__init__(message)
        self.file = file
        self.line = line
        self.column = column

    def __str__(self) -> str:
        base = super().__str__()
        if self.line:
            return f"{self.file}:{self.line}:{self.column}: {base}"
        return base


class ModelError(DcryppsError):
    """Invalid system model: bad wiring, unknown components, broken invariants."""


class PropertyError(DcryppsError):
    """Invalid property document: unknown observables, bad expressions."""


class KbError(DcryppsError):
    """Invalid attack knowledge base document."""


class ConfigError(DcryppsError):
    """Out-of-range or inconsistent configuration value."""


class ReportError(DcryppsError):
    """Invalid or mismatched derivation report."""

"""Exception types raised across the package."""

from __future__ import annotations


class TradeoptError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(TradeoptError):
    """Invalid attribute schema, or a reference to an unknown attribute."""


class LogFormatError(TradeoptError):
    """Malformed event-log CSV. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelSpecError(TradeoptError):
    """Malformed or inconsistent joint-model spec file."""


class EnumerationLimitError(TradeoptError):
    """Exact evaluation was requested on a domain too large to enumerate."""


class InfeasibleBudgetError(TradeoptError):
    """No attribute subset satisfies the requested cost budget."""

"""Exception hierarchy shared across the package."""


class CorrlogError(Exception):
    """Base class for all package-specific errors."""


class DataError(CorrlogError, ValueError):
    """A dataset or model violates a structural contract (shapes, label values)."""


class ParseError(DataError):
    """A file could not be parsed; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModelFormatError(CorrlogError, ValueError):
    """A model document is malformed, has the wrong version, or is inconsistent."""


class NumericError(CorrlogError, ArithmeticError):
    """A computation produced or received non-finite numbers."""

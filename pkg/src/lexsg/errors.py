"""Exception hierarchy of the package."""


class LexsgError(Exception):
    """Base class for all errors raised by lexsg."""


class FormatError(LexsgError):
    """Malformed .sg or strategy text; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelError(LexsgError):
    """A game, objective, or strategy violates a structural invariant."""


class SolverError(LexsgError):
    """Internal solver failure (e.g. iteration budget exhausted)."""


class LimitExceeded(LexsgError):
    """A configured resource limit (oracle strategy pairs, iterations) was hit."""

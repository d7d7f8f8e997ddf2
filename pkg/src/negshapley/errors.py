"""Exception hierarchy shared across the package.

The three error families map onto the command line tool's exit codes:
input that cannot be parsed at all (exit 1), input that parses but is
semantically ill-formed (exit 2), and computations that would exceed one
of the configurable resource caps (exit 3).
"""
from __future__ import annotations


class InputParseError(Exception):
    """A query string or facts file could not be parsed."""


class QuerySyntaxError(InputParseError):
    """Syntax error in a query string, with a character offset."""

    def __init__(self, message: str, position: int | None = None) -> None:
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


class FactSyntaxError(InputParseError):
    """Syntax error in a facts file or fact literal, with a line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SemanticError(Exception):
    """Input parsed but violates a well-formedness rule."""


class SafetyError(SemanticError):
    """A variable of a negated atom or inequality has no positive occurrence."""


class ArityError(SemanticError):
    """A relation is used with two different arities."""


class PlayerSetError(SemanticError):
    """A wealth function was evaluated outside its player set."""


class CapExceededError(Exception):
    """A computation would exceed one of the configurable size caps."""

"""Exception hierarchy shared by all pararank modules.

Three user-facing families map onto the CLI exit codes: configuration
problems (exit 1), data problems (exit 2), and everything else (exit 3).
"""

from __future__ import annotations


class PararankError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PararankError):
    """Invalid configuration: bad pattern, bad parameter, unusable config file."""


class DataError(PararankError):
    """Base class for problems with input data files."""


class ParseError(DataError):
    """A file could not be parsed. Carries the offending location when known."""

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class IntegrityError(DataError):
    """Structurally valid input that violates a dataset invariant."""

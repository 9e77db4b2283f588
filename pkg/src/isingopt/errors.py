"""Exception hierarchy shared by every engine and the CLI."""

from __future__ import annotations


class IsingOptError(Exception):
    """Base class for all errors raised by isingopt."""


class DimensionError(IsingOptError, ValueError):
    def __init__(self, what: str, expected: int, got: int):
        super().__init__(f"{what}: expected length {expected}, got {got}")
        self.expected = expected
        self.got = got


class ModelError(IsingOptError, ValueError):
    """Invalid model or instance data (bad index, self-coupling, duplicate pair...)."""


class ReductionError(IsingOptError, ValueError):
    """The instance cannot be compiled into a penalty Hamiltonian."""


class EngineDivergence(IsingOptError, ArithmeticError):
    """A solver produced a non-finite energy or amplitude."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class OracleCapError(IsingOptError, ValueError):
    """Exhaustive search refused because the state space exceeds the cap."""


class ParseError(IsingOptError, ValueError):
    """Malformed instance text. ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.message = message
        self.line = line
        self.column = column

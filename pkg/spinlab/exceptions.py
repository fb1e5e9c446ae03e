"""Error hierarchy shared by the library and the management commands.

Each class carries the process exit code the command layer maps it to.
"""
from __future__ import annotations


class SpinLabError(Exception):
    exit_code = 1


class UsageError(SpinLabError, ValueError):
    """Invalid parameters or a violated precondition."""

    exit_code = 2


class GraphFormatError(UsageError):
    """Malformed edge-list document."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapExceededError(SpinLabError):
    """An enumeration or matrix cap would be exceeded."""

    exit_code = 3


class InfeasibleError(SpinLabError):
    """Infeasible pinning, empty support or failed marginal estimate."""

    exit_code = 4


class ChainInvariantError(SpinLabError, AssertionError):
    """An internal invariant does not hold (zero conditional, lost feasibility...)."""

    exit_code = 1

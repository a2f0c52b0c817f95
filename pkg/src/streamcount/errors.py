"""Exception hierarchy.

Two families: bad input (``ValidationError``) and numerical failure
(``ComputationError``). The command line maps them to exit codes 1 and 2.
"""

from __future__ import annotations


class StreamCountError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StreamCountError, ValueError):
    pass


class ComputationError(StreamCountError, ArithmeticError):
    pass


class MalformedRowError(ValidationError):
    def __init__(self, line: int, column: str, message: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column!r}: {message}")


class DuplicateSizeError(ValidationError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"duplicate entry for {key}")


class NegativeDurationError(ValidationError):
    def __init__(self, field: str, value: float, line: int | None = None):
        self.field = field
        self.value = value
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field} must be a finite duration >= 0, got {value!r}")


class InvalidStreamCountError(ValidationError):
    def __init__(self, n, line: int | None = None):
        self.n = n
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}invalid stream count {n!r}; expected one of 1, 2, 4, 8, 16, 32")


class MissingStageTimingsError(ValidationError):
    def __init__(self, slae_size: int):
        self.slae_size = slae_size
        super().__init__(f"no stage timings for slae_size={slae_size}")


class BundleFormatError(ValidationError):
    pass


class TooFewObservationsError(ComputationError):
    pass


class RankDeficiencyError(ComputationError):
    pass


class ZeroVarianceError(ComputationError):
    pass


class NonPositiveTauError(ComputationError):
    pass

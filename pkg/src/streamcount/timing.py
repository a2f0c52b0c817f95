"""Closed-form timing identities for the three-stage partition pipeline.

Stage 1 and Stage 3 run on the GPU as H2D copy, kernel, D2H copy; Stage 2
runs on the CPU. All durations are milliseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import InvalidStreamCountError, NegativeDurationError, ValidationError

# More than 32 streams share the 32 Hyper-Q hardware queues and serialize.
STREAM_COUNTS = (1, 2, 4, 8, 16, 32)

STAGE_FIELDS = ("t1_h2d", "t1_comp", "t1_d2h", "t2_comp", "t3_h2d", "t3_comp", "t3_d2h")
OVERLAP_FIELDS = ("t1_comp", "t1_d2h", "t3_h2d", "t3_comp")


def check_stream_count(n) -> int:
    """Return ``n`` as an int if it is an admissible stream count."""
    if isinstance(n, bool) or not isinstance(n, (int, float)) or n != int(n):
        raise InvalidStreamCountError(n)
    n = int(n)
    if n not in STREAM_COUNTS:
        raise InvalidStreamCountError(n)
    return n


def _check_duration(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise NegativeDurationError(name, value)


def _check_size(slae_size) -> None:
    if isinstance(slae_size, bool) or not isinstance(slae_size, int) or slae_size < 1:
        raise ValidationError(f"slae_size must be a positive integer, got {slae_size!r}")


@dataclass(frozen=True)
class StageTimings:
    """Profiled, unstreamed times of the seven pipeline components for one size."""

    slae_size: int
    t1_h2d: float
    t1_comp: float
    t1_d2h: float
    t2_comp: float
    t3_h2d: float
    t3_comp: float
    t3_d2h: float

    def __post_init__(self):
        _check_size(self.slae_size)
        for name in STAGE_FIELDS:
            _check_duration(name, getattr(self, name))


@dataclass(frozen=True)
class OverlapTimings:
    """Partial record holding only the four components amortized by streaming.

    Enough for :func:`overlap_sum` but not for :func:`total_unstreamed`.
    """

    slae_size: int
    t1_comp: float
    t1_d2h: float
    t3_h2d: float
    t3_comp: float

    def __post_init__(self):
        _check_size(self.slae_size)
        for name in OVERLAP_FIELDS:
            _check_duration(name, getattr(self, name))


@dataclass(frozen=True)
class StreamedRun:
    """Measured total time of one run on ``num_streams`` streams."""

    slae_size: int
    num_streams: int
    t_str: float

    def __post_init__(self):
        _check_size(self.slae_size)
        object.__setattr__(self, "num_streams", check_stream_count(self.num_streams))
        _check_duration("t_str", self.t_str)


def total_unstreamed(t: StageTimings) -> float:
    """Total time without streams: the plain sum of all seven components."""
    return (t.t1_h2d + t.t1_comp + t.t1_d2h) + t.t2_comp + (t.t3_h2d + t.t3_comp + t.t3_d2h)


def overlap_sum(t: StageTimings | OverlapTimings) -> float:
    """Sum of the four GPU operations that get divided across streams."""
    return t.t1_comp + t.t1_d2h + t.t3_h2d + t.t3_comp


def streamed_lower_bound(t: StageTimings, n: int, overhead: float = 0.0) -> float:
    """Idealized streamed time on ``n`` streams.

    Assumes the Stage 1 H2D copy hides the rest of Stage 1 and the Stage 3
    D2H copy hides the rest of Stage 3, so only the overlap sum shrinks with
    ``n``. When that assumption fails the real pipeline is slower, so this is
    a lower bound (see :func:`streamcount.simulator.verify_lower_bound`).
    """
    if n < 1:
        raise InvalidStreamCountError(n)
    return t.t1_h2d + overlap_sum(t) / n + t.t2_comp + t.t3_d2h + overhead


def overhead_from_measurement(t_str: float, t_non_str: float, n: int, sum_ms: float) -> float:
    """Stream-creation overhead implied by a measured streamed run.

    Not clamped: noisy measurements may legitimately give a negative value.
    """
    if n < 1:
        raise InvalidStreamCountError(n)
    return (t_str - t_non_str) + (n - 1) / n * sum_ms


def overlap_benefit(n: int, sum_ms: float, overhead: float) -> float:
    """Predicted saving of ``n`` streams over none; positive means streaming wins."""
    if n < 1:
        raise InvalidStreamCountError(n)
    return (n - 1) / n * sum_ms - overhead


def as_dict(t: StageTimings | OverlapTimings) -> dict:
    return {f.name: getattr(t, f.name) for f in fields(t)}

"""Discrete-event model of copy-compute overlap on one GPU.

Each GPU stage is cut into ``num_streams`` equal chunks, one per stream. A
chunk goes through the H2D copy engine, the compute engine and the D2H copy
engine in that order; every engine runs one operation at a time and serves
ready operations first-come first-served (lower stream index first on ties).
Buffering between engines is unbounded. The CPU stage runs alone between the
two GPU stages, and stream creation costs ``tau_ms`` per stream up front.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import InvalidStreamCountError, NegativeDurationError, ValidationError
from .timing import StageTimings, streamed_lower_bound

ENGINES = ("h2d", "comp", "d2h")
HW_QUEUES = 32


class TraceEvent(NamedTuple):
    engine: str
    stream: int
    start_ms: float
    end_ms: float


@dataclass(frozen=True)
class PipelineSpec:
    stage1: tuple[float, float, float]
    cpu_ms: float
    stage3: tuple[float, float, float]
    num_streams: int = 1
    tau_ms: float = 0.0
    hw_queues: int = HW_QUEUES

    def __post_init__(self):
        object.__setattr__(self, "stage1", tuple(float(v) for v in self.stage1))
        object.__setattr__(self, "stage3", tuple(float(v) for v in self.stage3))
        if len(self.stage1) != 3 or len(self.stage3) != 3:
            raise ValidationError("stage1 and stage3 take (h2d_ms, comp_ms, d2h_ms)")
        for name, v in zip(
            ("t1_h2d", "t1_comp", "t1_d2h", "t3_h2d", "t3_comp", "t3_d2h", "cpu_ms", "tau_ms"),
            self.stage1 + self.stage3 + (self.cpu_ms, self.tau_ms),
        ):
            if not math.isfinite(v) or v < 0:
                raise NegativeDurationError(name, v)
        n = self.num_streams
        if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= 32:
            raise InvalidStreamCountError(n)
        if self.hw_queues < 1:
            raise ValidationError("hw_queues must be >= 1")

    @classmethod
    def from_timings(cls, t: StageTimings, num_streams: int, tau_ms: float = 0.0, **kw) -> "PipelineSpec":
        return cls(
            (t.t1_h2d, t.t1_comp, t.t1_d2h), t.t2_comp, (t.t3_h2d, t.t3_comp, t.t3_d2h),
            num_streams, tau_ms, **kw,
        )

    def timings(self, slae_size: int = 1) -> StageTimings:
        h1, c1, d1 = self.stage1
        h3, c3, d3 = self.stage3
        return StageTimings(slae_size, h1, c1, d1, self.cpu_ms, h3, c3, d3)


@dataclass
class SimResult:
    total_ms: float
    stage1_makespan_ms: float
    stage3_makespan_ms: float
    trace: list[TraceEvent] = field(default_factory=list)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("engine", "stream", "start_ms", "end_ms"))
        for ev in self.trace:
            w.writerow((ev.engine, ev.stream, repr(ev.start_ms), repr(ev.end_ms)))
        return buf.getvalue()


def _simulate_stage(durations, n, hw_queues, t0, trace):
    """Event-driven run of one chunked GPU stage; returns its makespan."""
    chunk = [d / n for d in durations]
    n_eng = len(chunk)
    # streams that share a hardware queue cannot start before the previous
    # stream on that queue has fully drained
    gate = {s: s - hw_queues for s in range(n) if s >= hw_queues}
    waiting_on = {}
    for s, prev in gate.items():
        waiting_on.setdefault(prev, []).append(s)

    ready = [[] for _ in range(n_eng)]  # per-engine heaps of (ready_time, stream)
    busy_until = [None] * n_eng
    events = []  # (time, engine, stream) completions
    now = 0.0
    for s in range(n):
        if s not in gate:
            heapq.heappush(ready[0], (0.0, s))

    def dispatch():
        for e in range(n_eng):
            if busy_until[e] is None and ready[e]:
                _, s = heapq.heappop(ready[e])
                end = now + chunk[e]
                busy_until[e] = end
                heapq.heappush(events, (end, e, s))
                if trace is not None:
                    trace.append(TraceEvent(ENGINES[e], s, t0 + now, t0 + end))

    dispatch()
    finish = 0.0
    while events:
        now = events[0][0]
        while events and events[0][0] == now:
            _, e, s = heapq.heappop(events)
            busy_until[e] = None
            if e + 1 < n_eng:
                heapq.heappush(ready[e + 1], (now, s))
            else:
                finish = now
                for nxt in waiting_on.get(s, ()):
                    heapq.heappush(ready[0], (now, nxt))
        dispatch()
    return finish


def simulate(spec: PipelineSpec, record_trace: bool = True) -> SimResult:
    """Run both GPU stages through the event model and assemble the total."""
    n = spec.num_streams
    trace = [] if record_trace else None
    create = n * spec.tau_ms
    m1 = _simulate_stage(spec.stage1, n, spec.hw_queues, create, trace)
    if trace is not None and spec.cpu_ms > 0:
        trace.append(TraceEvent("cpu", 0, create + m1, create + m1 + spec.cpu_ms))
    m3 = _simulate_stage(spec.stage3, n, spec.hw_queues, create + m1 + spec.cpu_ms, trace)
    return SimResult(m1 + spec.cpu_ms + m3 + create, m1, m3, trace or [])


def stage_makespan(h: float, c: float, d: float, n: int) -> float:
    """Closed-form makespan of ``n`` identical chunks through three engines."""
    return (h + c + d) / n + (n - 1) * max(h, c, d) / n


def dominance_holds(spec: PipelineSpec) -> bool:
    """True when H2D dominates Stage 1 and D2H dominates Stage 3."""
    h1, c1, d1 = spec.stage1
    h3, c3, d3 = spec.stage3
    return h1 >= max(c1, d1) and d3 >= max(h3, c3)


def verify_lower_bound(spec: PipelineSpec, atol: float = 1e-9) -> bool:
    """Check that the idealized streamed model never exceeds the simulated time."""
    sim = simulate(spec, record_trace=False)
    bound = streamed_lower_bound(spec.timings(), spec.num_streams, spec.num_streams * spec.tau_ms)
    return sim.total_ms >= bound - atol

"""Temporal-plus-structural conformance checking over event streams.

For every trace the checker carries a TraceState: alignment frontier, open
starts, the last Complete (the distance origin), committed temporal cost and
replaceable penalties for still-running activities. Events drive three
mechanisms:

* a Complete closes its open start and scores the measured duration,
* a Start scores the distance from the preceding Complete and opens a start,
* a tick (after each event, or periodically) estimates every running
  activity whose elapsed time already exceeds its profiled mean and replaces
  that activity's pending penalty with the new estimate.

Deviation scores are z-scores. A z above the resolved threshold kappa
(at-or-above when the inclusive threshold is configured) contributes
omega * phi * z to the trace's temporal cost. A zero standard deviation
yields z = 0 on an exact match and an infinite z otherwise, which exceeds
every threshold.

The trace table is bounded: at tsize traces, the least recently seen trace
is finalized, its pending penalties committed, and its result emitted.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import OrderedDict, deque
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Callable, Iterable, TextIO

from .alignment import ModelStructure, PrefixAligner
from .events import Event, EventLog, format_rfc3339
from .model import DistanceKey, DistanceStats, TimedProcessModel

__all__ = [
    "CheckerConfig",
    "DeviationRecord",
    "TraceResult",
    "CostReport",
    "StreamChecker",
    "z_score",
    "temporal_cost",
    "check_stream",
    "check_log",
]

logger = logging.getLogger(__name__)

PER_EVENT = "per-event"
PERIODIC = "periodic"
STREAM_CLOCK = "stream"
WALL_CLOCK = "wall"

KIND_DURATION = "duration"
KIND_DISTANCE = "distance"
KIND_UNFINISHED = "unfinished-estimate"


@dataclass(frozen=True)
class CheckerConfig:
    """Checker knobs.

    tsize bounds the trace table; phi scales every deviation cost; kappa and
    omega come from the model (see TimedProcessModel.resolve). The tick
    policy controls when running activities are re-estimated, the clock
    whether "now" is wall time or the largest event timestamp seen.
    tick_scans_completed keeps every started activity in the tick scan even
    after it completed (and completes then leave pending penalties in
    place), reproducing checkers that never prune their unfinished table.
    """

    tsize: int = 10000
    phi: float = 1.0
    inclusive_threshold: bool = False
    tick_policy: str = PER_EVENT
    tick_interval: float = 0.0
    clock: str = STREAM_CLOCK
    structural: bool = True
    tick_scans_completed: bool = False
    prefix_cap: int = 10000
    collect_traces: bool = True

    def __post_init__(self) -> None:
        if self.tsize < 1:
            raise ValueError("tsize must be at least 1")
        if self.phi < 0:
            raise ValueError("phi must be nonnegative")
        if self.tick_policy not in (PER_EVENT, PERIODIC):
            raise ValueError(f"unknown tick_policy {self.tick_policy!r}")
        if self.tick_policy == PERIODIC and self.tick_interval <= 0:
            raise ValueError("periodic ticking requires a positive tick_interval")
        if self.clock not in (STREAM_CLOCK, WALL_CLOCK):
            raise ValueError(f"unknown clock {self.clock!r}")
        if self.prefix_cap < 1:
            raise ValueError("prefix_cap must be at least 1")


@dataclass(frozen=True)
class DeviationRecord:
    """One scored deviation: a duration, a distance, or a running estimate."""

    trace_id: str
    kind: str
    key: DistanceKey
    observed: float
    z: float
    cost: float
    at: datetime

    def to_json_dict(self) -> dict:
        return {
            "trace": self.trace_id,
            "kind": self.kind,
            "key": self.key.to_string(),
            "observed_s": self.observed,
            "z": self.z,
            "cost": self.cost,
            "at": format_rfc3339(self.at),
        }


def z_score(x: float, stats: DistanceStats) -> float:
    """Absolute z-score of x under stats; sigma 0 yields 0 on an exact mean
    match and infinity otherwise."""
    if stats.stddev == 0:
        return 0.0 if x == stats.mean else math.inf
    return abs(x - stats.mean) / stats.stddev


def _score(
    x: float,
    stats: DistanceStats,
    omega: float,
    kappa: float,
    phi: float,
    inclusive: bool,
) -> tuple[float, float, bool]:
    """Returns (z, cost, triggered)."""
    z = z_score(x, stats)
    triggered = z >= kappa if inclusive else z > kappa
    if not triggered:
        return z, 0.0, False
    weight = omega * phi
    if weight == 0:
        return z, 0.0, True
    return z, weight * z, True


def temporal_cost(
    x: float,
    key: DistanceKey,
    model: TimedProcessModel,
    config: CheckerConfig,
) -> float:
    """Cost contribution of one observation, zero without a profile entry."""
    stats = model.profile.get(key)
    if stats is None:
        return 0.0
    omega, kappa = model.resolve(key)
    _, cost, _ = _score(x, stats, omega, kappa, config.phi, config.inclusive_threshold)
    return cost


@dataclass
class Counters:
    events: int = 0
    traces_seen: int = 0
    evictions: int = 0
    resurrections: int = 0
    repeated_starts: int = 0
    unmatched_completes: int = 0
    unknown_activity_events: int = 0
    durations_checked: int = 0
    duration_deviations: int = 0
    distances_checked: int = 0
    distance_deviations: int = 0
    ticks: int = 0
    cost_evaluations: int = 0

    def to_json_dict(self) -> dict[str, int]:
        return dict(vars(self))


@dataclass
class TraceState:
    """Live checking state of one process instance."""

    trace_id: str
    aligner: PrefixAligner | None
    prefix_cap: int
    open_starts: dict[str, datetime] = field(default_factory=dict)
    ever_started: dict[str, datetime] = field(default_factory=dict)
    preceding_complete: tuple[str, datetime] | None = None
    cost_time: float = 0.0
    unfinished: dict[str, DeviationRecord | None] = field(default_factory=dict)
    deviations: list[DeviationRecord] = field(default_factory=list)
    last_seen: datetime | None = None
    events: int = 0
    prefix: deque = field(default_factory=deque)

    def __post_init__(self) -> None:
        self.prefix = deque(maxlen=self.prefix_cap)

    def pending_penalty(self) -> float:
        return math.fsum(r.cost for r in self.unfinished.values() if r is not None)

    def structural_cost(self) -> int:
        return self.aligner.cost if self.aligner is not None else 0


@dataclass(frozen=True)
class TraceResult:
    """Final scores of one finished (or evicted) trace."""

    trace_id: str
    structural: int
    temporal: float
    combined: float
    events: int
    evicted: bool
    unknown_activities: tuple[str, ...]
    deviations: tuple[DeviationRecord, ...]

    def to_json_dict(self) -> dict:
        return {
            "structural": self.structural,
            "temporal": self.temporal,
            "combined": self.combined,
            "events": self.events,
            "evicted": self.evicted,
            "unknown_activities": list(self.unknown_activities),
            "deviations": [d.to_json_dict() for d in self.deviations],
        }


@dataclass
class CostReport:
    """Aggregated outcome of a checking run."""

    config: dict
    counters: Counters
    traces: "OrderedDict[str, TraceResult]"
    max_duration_z: DeviationRecord | None = None
    max_distance_z: DeviationRecord | None = None

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "counters": self.counters.to_json_dict(),
            "max_z": {
                "duration": self.max_duration_z.to_json_dict()
                if self.max_duration_z
                else None,
                "distance": self.max_distance_z.to_json_dict()
                if self.max_distance_z
                else None,
            },
            "traces": {
                trace_id: result.to_json_dict()
                for trace_id, result in self.traces.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def all_deviations(self) -> list[DeviationRecord]:
        out: list[DeviationRecord] = []
        for result in self.traces.values():
            out.extend(result.deviations)
        return out

    def write_csv(self, destination: TextIO) -> None:
        writer = csv.writer(destination)
        writer.writerow(["trace", "kind", "key", "observed_s", "z", "cost", "at"])
        for record in self.all_deviations():
            row = record.to_json_dict()
            writer.writerow(
                [
                    row["trace"],
                    row["kind"],
                    row["key"],
                    row["observed_s"],
                    row["z"],
                    row["cost"],
                    row["at"],
                ]
            )


def _config_snapshot(config: CheckerConfig) -> dict:
    return {
        "tsize": config.tsize,
        "phi": config.phi,
        "inclusive_threshold": config.inclusive_threshold,
        "tick_policy": config.tick_policy,
        "tick_interval": config.tick_interval,
        "clock": config.clock,
        "structural": config.structural,
        "tick_scans_completed": config.tick_scans_completed,
        "prefix_cap": config.prefix_cap,
    }


class StreamChecker:
    """Consumes events one by one; produces per-trace results and a report.

    on_record is called for every deviation record as it is produced
    (running estimates are re-emitted each time they are replaced);
    on_trace_done for every finalized trace, including evicted ones.
    """

    def __init__(
        self,
        model: TimedProcessModel,
        config: CheckerConfig | None = None,
        on_record: Callable[[DeviationRecord], None] | None = None,
        on_trace_done: Callable[[TraceResult], None] | None = None,
    ):
        self.model = model
        self.config = config or CheckerConfig()
        self.counters = Counters()
        self._on_record = on_record
        self._on_trace_done = on_trace_done
        self._structure = (
            ModelStructure.of(model) if self.config.structural else None
        )
        self._states: OrderedDict[str, TraceState] = OrderedDict()
        self._results: OrderedDict[str, TraceResult] = OrderedDict()
        self._evicted_ids: OrderedDict[str, None] = OrderedDict()
        self._evicted_memory = 4 * self.config.tsize
        self._stream_now: datetime | None = None
        self._next_tick: datetime | None = None
        self.max_duration_z: DeviationRecord | None = None
        self.max_distance_z: DeviationRecord | None = None
        self._finalized = False

    # -- clock ---------------------------------------------------------

    def now(self) -> datetime | None:
        if self.config.clock == WALL_CLOCK:
            return datetime.now(timezone.utc)
        return self._stream_now

    def _advance_stream_clock(self, timestamp: datetime) -> None:
        if self._stream_now is None or timestamp > self._stream_now:
            self._stream_now = timestamp

    # -- trace table ---------------------------------------------------

    def _state_for(self, event: Event) -> TraceState:
        state = self._states.get(event.trace_id)
        if state is not None:
            self._states.move_to_end(event.trace_id)
            return state
        if event.trace_id in self._evicted_ids:
            self.counters.resurrections += 1
            logger.warning(
                "trace %r reappeared after eviction; treating as a fresh instance",
                event.trace_id,
            )
        if len(self._states) >= self.config.tsize:
            oldest_id, oldest = self._states.popitem(last=False)
            self._finish_trace(oldest, evicted=True)
            self._remember_evicted(oldest_id)
            self.counters.evictions += 1
        self.counters.traces_seen += 1
        aligner = (
            PrefixAligner(self._structure) if self._structure is not None else None
        )
        state = TraceState(
            trace_id=event.trace_id,
            aligner=aligner,
            prefix_cap=self.config.prefix_cap,
        )
        self._states[event.trace_id] = state
        return state

    def _remember_evicted(self, trace_id: str) -> None:
        self._evicted_ids[trace_id] = None
        self._evicted_ids.move_to_end(trace_id)
        while len(self._evicted_ids) > self._evicted_memory:
            self._evicted_ids.popitem(last=False)

    # -- scoring -------------------------------------------------------

    def _evaluate(
        self, x: float, key: DistanceKey
    ) -> tuple[float, float, bool] | None:
        stats = self.model.profile.get(key)
        if stats is None:
            return None
        omega, kappa = self.model.resolve(key)
        self.counters.cost_evaluations += 1
        return _score(
            x,
            stats,
            omega,
            kappa,
            self.config.phi,
            self.config.inclusive_threshold,
        )

    def _commit(
        self,
        state: TraceState,
        kind: str,
        key: DistanceKey,
        observed: float,
        at: datetime,
    ) -> None:
        scored = self._evaluate(observed, key)
        if scored is None:
            return
        z, cost, triggered = scored
        record = DeviationRecord(
            trace_id=state.trace_id,
            kind=kind,
            key=key,
            observed=observed,
            z=z,
            cost=cost,
            at=at,
        )
        if kind == KIND_DURATION:
            self.counters.durations_checked += 1
            if triggered:
                self.counters.duration_deviations += 1
            if self.max_duration_z is None or z > self.max_duration_z.z:
                self.max_duration_z = record
        else:
            self.counters.distances_checked += 1
            if triggered:
                self.counters.distance_deviations += 1
            if self.max_distance_z is None or z > self.max_distance_z.z:
                self.max_distance_z = record
        if cost > 0:
            state.cost_time += cost
            state.deviations.append(record)
            if self._on_record:
                self._on_record(record)

    # -- ticking -------------------------------------------------------

    def tick(self, now: datetime | None = None) -> None:
        """Re-estimate running activities of every live trace."""
        moment = now or self.now()
        if moment is None:
            return
        for state in self._states.values():
            self._tick_trace(state, moment)

    def _tick_trace(self, state: TraceState, now: datetime) -> None:
        self.counters.ticks += 1
        scan = (
            state.ever_started
            if self.config.tick_scans_completed
            else state.open_starts
        )
        for activity, started_at in scan.items():
            key = DistanceKey.duration(activity)
            stats = self.model.profile.get(key)
            if stats is None:
                continue
            elapsed = (now - started_at).total_seconds()
            if elapsed <= stats.mean:
                continue
            scored = self._evaluate(elapsed, key)
            assert scored is not None
            z, cost, _ = scored
            record = DeviationRecord(
                trace_id=state.trace_id,
                kind=KIND_UNFINISHED,
                key=key,
                observed=elapsed,
                z=z,
                cost=cost,
                at=now,
            )
            state.unfinished[activity] = record
            if cost > 0 and self._on_record:
                self._on_record(record)

    # -- event processing ------------------------------------------------

    def process(self, event: Event) -> None:
        self.counters.events += 1
        self._advance_stream_clock(event.timestamp)
        now = self.now()
        state = self._state_for(event)
        state.last_seen = now
        state.events += 1
        state.prefix.append(event)

        if state.aligner is not None:
            state.aligner.step(event)
        if (
            self._structure is not None
            and (event.is_start or event.is_complete)
            and event.activity not in self._structure.task_index
        ):
            self.counters.unknown_activity_events += 1

        if event.is_complete:
            started_at = state.open_starts.pop(event.activity, None)
            if started_at is not None:
                duration = (event.timestamp - started_at).total_seconds()
                self._commit(
                    state,
                    KIND_DURATION,
                    DistanceKey.duration(event.activity),
                    duration,
                    event.timestamp,
                )
            else:
                self.counters.unmatched_completes += 1
            if not self.config.tick_scans_completed:
                state.unfinished.pop(event.activity, None)
            state.preceding_complete = (event.activity, event.timestamp)
        elif event.is_start:
            if state.preceding_complete is not None:
                origin_activity, origin_ts = state.preceding_complete
                gap = (event.timestamp - origin_ts).total_seconds()
                self._commit(
                    state,
                    KIND_DISTANCE,
                    DistanceKey.distance(origin_activity, event.activity),
                    gap,
                    event.timestamp,
                )
            if event.activity in state.open_starts:
                self.counters.repeated_starts += 1
            state.open_starts[event.activity] = event.timestamp
            if self.config.tick_scans_completed:
                state.ever_started[event.activity] = event.timestamp
            state.unfinished[event.activity] = None

        if self.config.tick_policy == PER_EVENT:
            if now is not None:
                self._tick_trace(state, now)
        elif now is not None:
            if self._next_tick is None:
                self._next_tick = now
            if now >= self._next_tick:
                self.tick(now)
                interval = timedelta(seconds=self.config.tick_interval)
                while self._next_tick <= now:
                    self._next_tick = self._next_tick + interval

    # -- finalization --------------------------------------------------

    def _finish_trace(self, state: TraceState, evicted: bool) -> None:
        pending = [
            r for r in state.unfinished.values() if r is not None and r.cost > 0
        ]
        temporal = state.cost_time + state.pending_penalty()
        structural = state.structural_cost()
        unknown = (
            tuple(sorted(state.aligner.unknown_activities))
            if state.aligner is not None
            else ()
        )
        result = TraceResult(
            trace_id=state.trace_id,
            structural=structural,
            temporal=temporal,
            combined=structural + temporal,
            events=state.events,
            evicted=evicted,
            unknown_activities=unknown,
            deviations=tuple(state.deviations) + tuple(pending),
        )
        if self.config.collect_traces:
            self._results[state.trace_id] = result
        if self._on_trace_done:
            self._on_trace_done(result)

    def live_stats(self) -> dict[str, int]:
        """Sizes of the live structures, for memory accounting."""
        return {
            "traces": len(self._states),
            "frontier_states": sum(
                s.aligner.frontier_size
                for s in self._states.values()
                if s.aligner is not None
            ),
            "open_starts": sum(len(s.open_starts) for s in self._states.values()),
            "retained_events": sum(len(s.prefix) for s in self._states.values()),
            "evicted_remembered": len(self._evicted_ids),
        }

    def finalize(self) -> CostReport:
        """Finish all live traces and assemble the report."""
        if self._finalized:
            raise RuntimeError("checker already finalized")
        self._finalized = True
        while self._states:
            _, state = self._states.popitem(last=False)
            self._finish_trace(state, evicted=False)
        return CostReport(
            config=_config_snapshot(self.config),
            counters=self.counters,
            traces=self._results,
            max_duration_z=self.max_duration_z,
            max_distance_z=self.max_distance_z,
        )


def check_stream(
    events: Iterable[Event],
    model: TimedProcessModel,
    config: CheckerConfig | None = None,
    on_record: Callable[[DeviationRecord], None] | None = None,
    on_trace_done: Callable[[TraceResult], None] | None = None,
) -> CostReport:
    """Drive a StreamChecker over an event iterable and finalize it."""
    checker = StreamChecker(
        model, config, on_record=on_record, on_trace_done=on_trace_done
    )
    for event in events:
        checker.process(event)
    return checker.finalize()


def check_log(
    log: EventLog,
    model: TimedProcessModel,
    config: CheckerConfig | None = None,
    on_record: Callable[[DeviationRecord], None] | None = None,
    on_trace_done: Callable[[TraceResult], None] | None = None,
) -> CostReport:
    """Offline convenience: replay the log flat out into a stream check.

    Events are merged across traces in timestamp order (ties keep log
    order), the clock follows event timestamps, and the trace table is
    widened to hold every trace of the log.
    """
    from .streams import replay

    config = config or CheckerConfig()
    config = replace(
        config,
        clock=STREAM_CLOCK,
        tsize=max(config.tsize, max(len(log), 1)),
    )
    return check_stream(
        replay(log, speed=0.0),
        model,
        config,
        on_record=on_record,
        on_trace_done=on_trace_done,
    )

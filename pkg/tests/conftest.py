"""Shared fixtures: the worked-example model and traces, plus XES helpers."""

from datetime import datetime, timedelta, timezone

import pytest

from tempograph.checking import CheckerConfig
from tempograph.events import Event, EventLog, Trace
from tempograph.model import (
    DistanceKey,
    DistanceStats,
    Sequence,
    Task,
    TaskAnnotation,
    TemporalProfile,
    TimedProcessModel,
    Xor,
)

BASE = datetime(2024, 1, 1, tzinfo=timezone.utc)


def at(seconds: float) -> datetime:
    return BASE + timedelta(seconds=seconds)


def ev(trace_id: str, activity: str, lifecycle: str, seconds: float) -> Event:
    return Event(
        trace_id=trace_id,
        activity=activity,
        lifecycle=lifecycle,
        timestamp=at(seconds),
    )


def stats(mean: float, stddev: float, n: int = 10) -> DistanceStats:
    """Profile entry with plausible min/max around the mean."""
    return DistanceStats(
        n=n, mean=mean, stddev=stddev, min=mean - 2 * stddev, max=mean + 2 * stddev
    )


@pytest.fixture
def worked_profile() -> TemporalProfile:
    """Durations and the one distance of the running example, back-solved
    from its z-scores: Dur(A) gives z=0.25 at x=19, Dist(A->B) gives z=14
    at x=10, Dur(B) gives z=2 at elapsed 7."""
    return TemporalProfile(
        entries={
            DistanceKey.duration("A"): stats(20.0, 4.0),
            DistanceKey.distance("A", "B"): stats(3.0, 0.5),
            DistanceKey.duration("B"): stats(6.0, 0.5),
        }
    )


@pytest.fixture
def worked_profile_with_c(worked_profile) -> TemporalProfile:
    entries = dict(worked_profile.entries)
    entries[DistanceKey.duration("C")] = stats(4.0, 1.0)
    return TemporalProfile(entries=entries)


def _worked_model(profile: TemporalProfile) -> TimedProcessModel:
    return TimedProcessModel(
        root=Sequence(children=(Task("A"), Task("B"), Task("C"))),
        profile=profile,
        annotations={"B": TaskAnnotation(kappa=2.0)},
        distance_overrides={("A", "B"): TaskAnnotation(omega=2.0)},
    )


@pytest.fixture
def worked_model(worked_profile) -> TimedProcessModel:
    return _worked_model(worked_profile)


@pytest.fixture
def worked_model_with_c(worked_profile_with_c) -> TimedProcessModel:
    return _worked_model(worked_profile_with_c)


@pytest.fixture
def worked_config() -> CheckerConfig:
    return CheckerConfig(
        inclusive_threshold=True,
        tick_scans_completed=True,
        clock="stream",
    )


@pytest.fixture
def t1_events() -> list[Event]:
    return [
        ev("t1", "A", "start", 0),
        ev("t1", "A", "complete", 19),
        ev("t1", "B", "start", 29),
    ]


@pytest.fixture
def t2_events() -> list[Event]:
    return [
        ev("t2", "A", "start", 0),
        ev("t2", "A", "complete", 20),
        ev("t2", "B", "start", 23),
        ev("t2", "C", "start", 24),
        ev("t2", "C", "complete", 28),
        ev("t2", "B", "complete", 29),
    ]


@pytest.fixture
def fig1_model() -> TimedProcessModel:
    """Five tasks, one decision: A; B; (C xor D); E."""
    return TimedProcessModel(
        root=Sequence(
            children=(
                Task("A"),
                Task("B"),
                Xor(children=(Task("C"), Task("D"))),
                Task("E"),
            )
        )
    )


def xes_text(log: EventLog) -> str:
    """Render a log as minimal XES."""
    from xml.sax.saxutils import quoteattr

    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
    for trace in log:
        lines.append("  <trace>")
        lines.append(f"    <string key=\"concept:name\" value={quoteattr(trace.trace_id)}/>")
        for event in trace.events:
            lines.append("    <event>")
            lines.append(
                f"      <string key=\"concept:name\" value={quoteattr(event.activity)}/>"
            )
            lines.append(
                f"      <string key=\"lifecycle:transition\" "
                f"value={quoteattr(event.lifecycle)}/>"
            )
            lines.append(
                f"      <date key=\"time:timestamp\" "
                f"value=\"{event.timestamp.isoformat()}\"/>"
            )
            lines.append("    </event>")
        lines.append("  </trace>")
    lines.append("</log>")
    return "\n".join(lines) + "\n"


def trace_of(trace_id: str, *moves: tuple[str, str, float]) -> Trace:
    """Build a trace from (activity, lifecycle, seconds) triples."""
    return Trace(
        trace_id=trace_id,
        events=tuple(ev(trace_id, a, lc, s) for a, lc, s in moves),
    )

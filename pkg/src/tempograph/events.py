"""Core event model: events, traces, logs, and RFC-3339 timestamps.

Events carry a trace id, an activity name, a lifecycle phase and a UTC
timestamp. Traces keep their events sorted by timestamp (stable, so equal
timestamps keep log order); logs keep trace ids unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping

__all__ = [
    "START",
    "COMPLETE",
    "Event",
    "Trace",
    "EventLog",
    "normalize_lifecycle",
    "parse_rfc3339",
    "format_rfc3339",
]

START = "start"
COMPLETE = "complete"


def normalize_lifecycle(raw: str | None) -> str:
    """Map a raw lifecycle value onto 'start', 'complete', or itself.

    Matching is case-insensitive; anything else (including a missing value,
    which becomes the empty string) is retained verbatim so it can be carried
    through untouched and ignored by mining and checking.
    """
    if raw is None:
        return ""
    lowered = raw.strip().lower()
    if lowered in (START, COMPLETE):
        return lowered
    return raw


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC-3339 / ISO-8601 timestamp into an aware UTC datetime.

    Accepts 'Z' and numeric offsets; a naive timestamp is taken to be UTC.
    """
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_rfc3339(dt: datetime) -> str:
    """Render an aware datetime as ISO-8601 in UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


@dataclass(frozen=True, slots=True)
class Event:
    """One observed lifecycle transition of an activity within a trace."""

    trace_id: str
    activity: str
    lifecycle: str
    timestamp: datetime
    attrs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.trace_id:
            raise ValueError("event requires a non-empty trace_id")
        if not self.activity:
            raise ValueError("event requires a non-empty activity")
        ts = self.timestamp
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        else:
            ts = ts.astimezone(timezone.utc)
        object.__setattr__(self, "timestamp", ts)

    @property
    def is_start(self) -> bool:
        return self.lifecycle == START or normalize_lifecycle(self.lifecycle) == START

    @property
    def is_complete(self) -> bool:
        return (
            self.lifecycle == COMPLETE
            or normalize_lifecycle(self.lifecycle) == COMPLETE
        )


@dataclass(frozen=True)
class Trace:
    """The events of one process instance, ordered by timestamp.

    The sort is stable: events with equal timestamps keep the order in which
    they were supplied (log order).
    """

    trace_id: str
    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        for event in self.events:
            if event.trace_id != self.trace_id:
                raise ValueError(
                    f"event trace_id {event.trace_id!r} does not match "
                    f"trace {self.trace_id!r}"
                )
        ordered = tuple(sorted(self.events, key=lambda e: e.timestamp))
        object.__setattr__(self, "events", ordered)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


@dataclass(frozen=True)
class EventLog:
    """A collection of traces with unique trace ids."""

    traces: tuple[Trace, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for trace in self.traces:
            if trace.trace_id in seen:
                raise ValueError(f"duplicate trace_id {trace.trace_id!r}")
            seen.add(trace.trace_id)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def trace_ids(self) -> list[str]:
        return [t.trace_id for t in self.traces]

    def events_in_log_order(self) -> Iterable[Event]:
        """All events, trace by trace, inside each trace by timestamp."""
        for trace in self.traces:
            yield from trace.events


def log_from_events(events: Iterable[Event]) -> EventLog:
    """Group a flat event sequence into an EventLog.

    Traces appear in order of first occurrence of their id; events within a
    trace are re-sorted by timestamp (stable).
    """
    grouped: dict[str, list[Event]] = {}
    for event in events:
        grouped.setdefault(event.trace_id, []).append(event)
    traces = tuple(
        Trace(trace_id=tid, events=tuple(evs)) for tid, evs in grouped.items()
    )
    return EventLog(traces=traces)

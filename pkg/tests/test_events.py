"""Event, Trace, and EventLog behavior plus timestamp parsing."""

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tempograph.events import (
    Event,
    EventLog,
    Trace,
    format_rfc3339,
    log_from_events,
    normalize_lifecycle,
    parse_rfc3339,
)

from conftest import BASE, ev


def test_event_requires_trace_and_activity():
    with pytest.raises(ValueError):
        Event(trace_id="", activity="A", lifecycle="start", timestamp=BASE)
    with pytest.raises(ValueError):
        Event(trace_id="t", activity="", lifecycle="start", timestamp=BASE)


def test_lifecycle_normalization():
    assert normalize_lifecycle("START") == "start"
    assert normalize_lifecycle("Complete") == "complete"
    assert normalize_lifecycle("schedule") == "schedule"
    assert normalize_lifecycle(None) == ""


def test_event_lifecycle_predicates():
    e = ev("t", "A", "start", 0)
    assert e.is_start and not e.is_complete
    e = Event(trace_id="t", activity="A", lifecycle="COMPLETE", timestamp=BASE)
    assert e.is_complete


def test_naive_timestamp_becomes_utc():
    e = Event(
        trace_id="t", activity="A", lifecycle="start",
        timestamp=datetime(2024, 1, 1, 12, 0, 0),
    )
    assert e.timestamp.tzinfo == timezone.utc


def test_nonutc_timestamp_converted():
    offset = timezone(timedelta(hours=2))
    e = Event(
        trace_id="t", activity="A", lifecycle="start",
        timestamp=datetime(2024, 1, 1, 12, 0, 0, tzinfo=offset),
    )
    assert e.timestamp == datetime(2024, 1, 1, 10, 0, 0, tzinfo=timezone.utc)


def test_parse_rfc3339_accepts_z_suffix():
    parsed = parse_rfc3339("2024-01-01T12:00:00Z")
    assert parsed == datetime(2024, 1, 1, 12, 0, 0, tzinfo=timezone.utc)


def test_parse_rfc3339_offset_and_fraction():
    parsed = parse_rfc3339("2024-01-01T12:00:00.250+02:00")
    assert parsed == datetime(
        2024, 1, 1, 10, 0, 0, 250000, tzinfo=timezone.utc
    )


def test_parse_rfc3339_rejects_garbage():
    with pytest.raises(ValueError):
        parse_rfc3339("not a timestamp")


@given(
    st.datetimes(
        min_value=datetime(1980, 1, 1),
        max_value=datetime(2100, 1, 1),
        timezones=st.just(timezone.utc),
    )
)
def test_rfc3339_round_trip(ts):
    assert parse_rfc3339(format_rfc3339(ts)) == ts


def test_trace_sorts_events_by_timestamp():
    t = Trace(
        trace_id="t",
        events=(ev("t", "B", "start", 5), ev("t", "A", "start", 1)),
    )
    assert [e.activity for e in t.events] == ["A", "B"]


def test_trace_sort_is_stable_on_ties():
    t = Trace(
        trace_id="t",
        events=(
            ev("t", "X", "start", 3),
            ev("t", "Y", "start", 3),
            ev("t", "Z", "start", 3),
        ),
    )
    assert [e.activity for e in t.events] == ["X", "Y", "Z"]


def test_trace_rejects_foreign_events():
    with pytest.raises(ValueError):
        Trace(trace_id="t", events=(ev("other", "A", "start", 0),))


def test_log_rejects_duplicate_trace_ids():
    a = Trace(trace_id="t", events=(ev("t", "A", "start", 0),))
    with pytest.raises(ValueError):
        EventLog(traces=(a, a))


def test_log_from_events_groups_by_trace():
    events = [
        ev("t1", "A", "start", 0),
        ev("t2", "A", "start", 1),
        ev("t1", "A", "complete", 2),
    ]
    log = log_from_events(events)
    assert len(log) == 2
    assert len(log.traces[0].events) == 2


def test_events_in_log_order():
    log = log_from_events([ev("t1", "A", "start", 0), ev("t2", "B", "start", 1)])
    activities = [e.activity for e in log.events_in_log_order()]
    assert activities == ["A", "B"]

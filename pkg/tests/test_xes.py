"""XES parsing: plain, gzipped, namespaced, and malformed inputs."""

import gzip

import pytest

from tempograph.events import EventLog
from tempograph.xes import XesParseError, parse_xes

from conftest import ev, trace_of, xes_text

TINY = """<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <trace>
    <string key="concept:name" value="case-1"/>
    <event>
      <string key="concept:name" value="A"/>
      <string key="lifecycle:transition" value="start"/>
      <date key="time:timestamp" value="2024-01-01T00:00:00Z"/>
    </event>
    <event>
      <string key="concept:name" value="A"/>
      <string key="lifecycle:transition" value="COMPLETE"/>
      <date key="time:timestamp" value="2024-01-01T00:00:20+00:00"/>
      <string key="org:resource" value="alice"/>
    </event>
  </trace>
</log>
"""


def test_parse_minimal_log(tmp_path):
    path = tmp_path / "tiny.xes"
    path.write_text(TINY)
    result = parse_xes(path)
    assert len(result.log) == 1
    trace = result.log.traces[0]
    assert trace.trace_id == "case-1"
    assert [e.lifecycle for e in trace.events] == ["start", "complete"]
    assert trace.events[1].attrs["org:resource"] == "alice"
    assert not result.warnings


def test_parse_gzipped(tmp_path):
    path = tmp_path / "tiny.xes.gz"
    path.write_bytes(gzip.compress(TINY.encode()))
    result = parse_xes(path)
    assert len(result.log) == 1
    assert result.log.traces[0].trace_id == "case-1"


def test_gzip_detected_by_content_not_name(tmp_path):
    path = tmp_path / "oddly_named.xes"
    path.write_bytes(gzip.compress(TINY.encode()))
    assert len(parse_xes(path).log) == 1


def test_parse_namespaced(tmp_path):
    text = TINY.replace("<log ", '<log xmlns="http://www.xes-standard.org/" ')
    path = tmp_path / "ns.xes"
    path.write_text(text)
    assert len(parse_xes(path).log) == 1


def test_trace_without_name_gets_positional_id(tmp_path):
    text = TINY.replace('<string key="concept:name" value="case-1"/>\n    ', "", 1)
    path = tmp_path / "anon.xes"
    path.write_text(text)
    result = parse_xes(path)
    assert result.log.traces[0].trace_id == "trace-1"
    assert any("concept:name" in w for w in result.warnings)


def test_duplicate_trace_ids_disambiguated(tmp_path):
    log = EventLog(traces=(trace_of("dup", ("A", "start", 0)),))
    doubled = xes_text(log).replace(
        "</trace>", "</trace>" + xes_text(log).split("<log xes.version=\"1.0\">")[1].rsplit("</log>")[0], 1
    )
    path = tmp_path / "dup.xes"
    path.write_text(doubled)
    result = parse_xes(path)
    ids = [t.trace_id for t in result.log.traces]
    assert ids[0] == "dup"
    assert ids[1].startswith("dup~dup")
    assert any("duplicate" in w.lower() for w in result.warnings)


def test_event_missing_activity_dropped(tmp_path):
    text = TINY.replace('<string key="concept:name" value="A"/>\n      ', "", 1)
    path = tmp_path / "noact.xes"
    path.write_text(text)
    result = parse_xes(path)
    assert len(result.log.traces[0].events) == 1
    assert result.dropped_events == 1


def test_event_with_bad_timestamp_dropped(tmp_path):
    text = TINY.replace("2024-01-01T00:00:00Z", "yesterday-ish")
    path = tmp_path / "badts.xes"
    path.write_text(text)
    result = parse_xes(path)
    assert len(result.log.traces[0].events) == 1
    assert result.dropped_events == 1
    assert any("timestamp" in w for w in result.warnings)


def test_not_xml_raises(tmp_path):
    path = tmp_path / "nope.xes"
    path.write_text("this is not xml at all")
    with pytest.raises(XesParseError):
        parse_xes(path)


def test_round_trip_through_xes_text(tmp_path):
    log = EventLog(
        traces=(
            trace_of("r-1", ("A", "start", 0), ("A", "complete", 5)),
            trace_of("r-2", ("B", "start", 1), ("B", "complete", 2)),
        )
    )
    path = tmp_path / "rt.xes"
    path.write_text(xes_text(log))
    parsed = parse_xes(path).log
    assert len(parsed) == 2
    for original, reparsed in zip(log.traces, parsed.traces):
        assert original.trace_id == reparsed.trace_id
        assert [e.activity for e in original.events] == [
            e.activity for e in reparsed.events
        ]
        assert [e.timestamp for e in original.events] == [
            e.timestamp for e in reparsed.events
        ]

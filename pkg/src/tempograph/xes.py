"""Streaming XES parser for the log/trace/event subset used here.

Reads plain or gzip-compressed XES (sniffed from magic bytes, so any file
extension works). Recognized event attributes are concept:name (activity),
time:timestamp and lifecycle:transition; every other attribute is carried
through as a string in Event.attrs. Traces take their id from their
concept:name.

Problems that do not invalidate the whole file are collected as warnings:
an event without a timestamp is dropped, a trace without a name gets a
synthesized one, duplicate trace names are disambiguated.
"""

from __future__ import annotations

import gzip
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO
from xml.etree import ElementTree

from .events import Event, EventLog, Trace, normalize_lifecycle, parse_rfc3339

__all__ = ["XesParseError", "XesResult", "parse_xes"]

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"


class XesParseError(ValueError):
    """Raised when the XML itself is malformed (with parser position)."""


@dataclass
class XesResult:
    """Parsed log plus the warnings produced on the way."""

    log: EventLog
    warnings: list[str] = field(default_factory=list)
    dropped_events: int = 0


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _open_binary(source: str | Path | BinaryIO) -> BinaryIO:
    if isinstance(source, (str, Path)):
        raw: BinaryIO = open(source, "rb")
    else:
        raw = source
    buffered = io.BufferedReader(raw) if not isinstance(raw, io.BufferedReader) else raw
    if buffered.peek(2)[:2] == GZIP_MAGIC:
        return gzip.open(buffered, "rb")  # type: ignore[return-value]
    return buffered


def _collect_attributes(elem: ElementTree.Element) -> dict[str, str]:
    """Flatten the key/value attribute children of a trace or event element."""
    attrs: dict[str, str] = {}
    for child in elem:
        key = child.get("key")
        if key is None:
            continue
        value = child.get("value")
        if value is not None:
            attrs[key] = value
    return attrs


def parse_xes(source: str | Path | BinaryIO) -> XesResult:
    """Parse an XES document into an EventLog.

    Raises XesParseError for malformed XML; recoverable per-event and
    per-trace problems become warnings on the result instead.
    """
    warnings: list[str] = []
    dropped = 0
    traces: list[Trace] = []
    seen_ids: set[str] = set()

    stream = _open_binary(source)
    close_stream = isinstance(source, (str, Path))
    trace_elem: ElementTree.Element | None = None
    pending_events: list[dict[str, str]] = []
    trace_ordinal = 0

    try:
        parser = ElementTree.iterparse(stream, events=("start", "end"))
        for xml_event, elem in parser:
            tag = _local_name(elem.tag)
            if xml_event == "start":
                if tag == "trace":
                    trace_elem = elem
                    pending_events = []
                continue
            if tag == "event" and trace_elem is not None:
                pending_events.append(_collect_attributes(elem))
                elem.clear()
            elif tag == "trace":
                trace_ordinal += 1
                trace_attrs = _collect_attributes(elem)
                trace_id = trace_attrs.get("concept:name", "")
                if not trace_id:
                    trace_id = f"trace-{trace_ordinal}"
                    warnings.append(
                        f"trace #{trace_ordinal} has no concept:name, "
                        f"using {trace_id!r}"
                    )
                if trace_id in seen_ids:
                    base = trace_id
                    suffix = 2
                    while f"{base}~dup{suffix}" in seen_ids:
                        suffix += 1
                    trace_id = f"{base}~dup{suffix}"
                    warnings.append(
                        f"duplicate trace id {base!r}, renamed to {trace_id!r}"
                    )
                seen_ids.add(trace_id)
                events, trace_dropped, trace_warnings = _build_events(
                    trace_id, pending_events
                )
                dropped += trace_dropped
                warnings.extend(trace_warnings)
                traces.append(Trace(trace_id=trace_id, events=tuple(events)))
                elem.clear()
                trace_elem = None
                pending_events = []
    except ElementTree.ParseError as exc:
        raise XesParseError(f"malformed XES document: {exc}") from exc
    finally:
        if close_stream:
            stream.close()

    for message in warnings:
        logger.warning("%s", message)
    return XesResult(
        log=EventLog(traces=tuple(traces)), warnings=warnings, dropped_events=dropped
    )


def _build_events(
    trace_id: str, raw_events: list[dict[str, str]]
) -> tuple[list[Event], int, list[str]]:
    events: list[Event] = []
    dropped = 0
    warnings: list[str] = []
    for index, attrs in enumerate(raw_events):
        activity = attrs.pop("concept:name", "")
        raw_ts = attrs.pop("time:timestamp", None)
        lifecycle = normalize_lifecycle(attrs.pop("lifecycle:transition", None))
        if not activity:
            dropped += 1
            warnings.append(
                f"trace {trace_id!r}: event #{index} has no concept:name, dropped"
            )
            continue
        if raw_ts is None:
            dropped += 1
            warnings.append(
                f"trace {trace_id!r}: event {activity!r} has no time:timestamp, "
                "dropped"
            )
            continue
        try:
            timestamp = parse_rfc3339(raw_ts)
        except ValueError:
            dropped += 1
            warnings.append(
                f"trace {trace_id!r}: event {activity!r} has unparseable "
                f"timestamp {raw_ts!r}, dropped"
            )
            continue
        events.append(
            Event(
                trace_id=trace_id,
                activity=activity,
                lifecycle=lifecycle,
                timestamp=timestamp,
                attrs=attrs,
            )
        )
    return events, dropped, warnings

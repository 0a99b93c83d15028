"""Event stream transport: line protocol, input sources, and replay.

The wire format is one JSON object per line (UTF-8, LF): trace, activity,
lifecycle, ts (RFC-3339), and an optional attrs object. Malformed lines are
skipped with a warning so a stream survives a bad producer.

Sources are named by a spec string: '-' for stdin, 'file:PATH' or a bare
path for files, 'tcp:HOST:PORT' to listen for producers (one connection is
one producer; producers are drained one after the other).

Replay turns a stored log back into a stream: events are merged across
traces in timestamp order (ties keep log order) and emitted with their
original timestamps. Pacing follows the timestamp gaps scaled by 1/speed,
speed 0 meaning no pacing at all; optional jitter adds a seeded random extra
delay per gap, affecting pacing only, never timestamps.
"""

from __future__ import annotations

import json
import logging
import random
import socket
import sys
import time
from typing import Callable, Iterable, Iterator, TextIO

from .events import Event, EventLog, format_rfc3339, normalize_lifecycle, parse_rfc3339

__all__ = [
    "encode_event",
    "decode_event",
    "read_events",
    "open_source",
    "serve_lines",
    "replay",
    "pacing_delays",
    "send_lines",
]

logger = logging.getLogger(__name__)


def encode_event(event: Event) -> str:
    """One line-protocol line (without the newline)."""
    payload: dict = {
        "trace": event.trace_id,
        "activity": event.activity,
        "lifecycle": event.lifecycle,
        "ts": format_rfc3339(event.timestamp),
    }
    if event.attrs:
        payload["attrs"] = dict(event.attrs)
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def decode_event(line: str) -> Event:
    """Parse one line-protocol line; raises ValueError when malformed."""
    raw = json.loads(line)
    if not isinstance(raw, dict):
        raise ValueError("line is not a JSON object")
    try:
        trace = str(raw["trace"])
        activity = str(raw["activity"])
        ts = parse_rfc3339(str(raw["ts"]))
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from exc
    lifecycle = normalize_lifecycle(raw.get("lifecycle"))
    attrs = raw.get("attrs") or {}
    if not isinstance(attrs, dict):
        raise ValueError("attrs must be an object")
    return Event(
        trace_id=trace,
        activity=activity,
        lifecycle=lifecycle,
        timestamp=ts,
        attrs={str(k): str(v) for k, v in attrs.items()},
    )


def read_events(
    lines: Iterable[str],
    on_warning: Callable[[str], None] | None = None,
) -> Iterator[Event]:
    """Decode a line stream, skipping malformed lines with a warning."""
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            yield decode_event(stripped)
        except (ValueError, json.JSONDecodeError) as exc:
            message = f"skipping malformed line {number}: {exc}"
            logger.warning("%s", message)
            if on_warning:
                on_warning(message)


def open_source(spec: str, max_connections: int | None = None) -> Iterator[str]:
    """Lines from a source spec: '-', 'file:PATH', bare path, or 'tcp:HOST:PORT'."""
    if spec == "-":
        return iter(sys.stdin)
    if spec.startswith("tcp:"):
        _, host, port = spec.split(":", 2)
        return serve_lines(host, int(port), max_connections=max_connections)
    path = spec[len("file:") :] if spec.startswith("file:") else spec
    def _file_lines() -> Iterator[str]:
        with open(path, "r", encoding="utf-8") as handle:
            yield from handle
    return _file_lines()


def serve_lines(
    host: str,
    port: int,
    max_connections: int | None = None,
    ready: Callable[[int], None] | None = None,
) -> Iterator[str]:
    """Listen on host:port and yield lines from producers, one at a time.

    Each accepted connection is drained to EOF before the next is accepted.
    Runs until interrupted, or until max_connections producers have been
    served when a bound is given. `ready` receives the bound port (useful
    with port 0).
    """
    with socket.create_server((host, port)) as server:
        if ready is not None:
            ready(server.getsockname()[1])
        served = 0
        while max_connections is None or served < max_connections:
            connection, peer = server.accept()
            logger.info("producer connected from %s", peer)
            served += 1
            with connection, connection.makefile(
                "r", encoding="utf-8", newline="\n"
            ) as stream:
                yield from stream
            logger.info("producer %s disconnected", peer)


def send_lines(host: str, port: int, lines: Iterable[str]) -> int:
    """Connect to a consumer and write one line each; returns lines sent."""
    count = 0
    with socket.create_connection((host, port)) as connection:
        with connection.makefile("w", encoding="utf-8", newline="\n") as stream:
            for line in lines:
                stream.write(line + "\n")
                count += 1
    return count


def _merged_events(log: EventLog) -> list[Event]:
    ordered = list(log.events_in_log_order())
    ordered.sort(key=lambda e: e.timestamp)  # stable: ties keep log order
    return ordered


def pacing_delays(
    events: list[Event], speed: float, jitter: float = 0.0, seed: int | None = None
) -> list[float]:
    """Per-event sleep durations for a replay; pure and seed-deterministic.

    The first event is emitted immediately; each later delay is the
    timestamp gap to its predecessor divided by speed, plus a uniform
    [0, jitter) extra when jitter is set. Speed 0 yields all zeros.
    """
    if speed < 0:
        raise ValueError("speed must be nonnegative")
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    rng = random.Random(seed)
    delays: list[float] = []
    previous = None
    for event in events:
        if speed == 0:
            delays.append(0.0)
        else:
            gap = (
                0.0
                if previous is None
                else (event.timestamp - previous).total_seconds() / speed
            )
            if jitter:
                gap += rng.uniform(0.0, jitter)
            delays.append(max(gap, 0.0))
        previous = event.timestamp
    return delays


def replay(
    log: EventLog,
    speed: float = 1.0,
    jitter: float = 0.0,
    seed: int | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Iterator[Event]:
    """Emit the log as a stream with original timestamps; paces unless speed 0."""
    events = _merged_events(log)
    delays = pacing_delays(events, speed, jitter, seed)
    for event, delay in zip(events, delays):
        if delay > 0:
            sleep(delay)
        yield event


def write_stream(events: Iterable[Event], destination: TextIO) -> int:
    """Encode events onto a text stream; returns the number written."""
    count = 0
    for event in events:
        destination.write(encode_event(event) + "\n")
        count += 1
    return count

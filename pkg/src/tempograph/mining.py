"""Temporal profile mining.

One forward scan per trace collects two sample families:

* task durations: seconds between an activity's open Start and its Complete
  (open starts are last-write-wins; a Complete without an open start yields
  no duration sample),
* temporal distances: seconds between a Complete and the next Start in the
  trace, keyed by the (completed activity, started activity) pair. Any
  Complete, matched or not, becomes the new distance origin.

Duration entries are always kept; distance entries must reach min_support
samples. Statistics use a two-pass compensated mean and, by default, the
population standard deviation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .events import EventLog
from .model import DistanceKey, DistanceStats, TemporalProfile

__all__ = [
    "MinerConfig",
    "MiningDiagnostics",
    "collect_samples",
    "stats_of",
    "mine_profile",
]

logger = logging.getLogger(__name__)

POPULATION = "population"
SAMPLE = "sample"


@dataclass(frozen=True)
class MinerConfig:
    """Mining knobs: distance support floor and stddev flavor."""

    min_support: int = 1
    stddev_mode: str = POPULATION

    def __post_init__(self) -> None:
        if self.min_support < 0:
            raise ValueError("min_support must be nonnegative")
        if self.stddev_mode not in (POPULATION, SAMPLE):
            raise ValueError(f"unknown stddev_mode {self.stddev_mode!r}")


@dataclass
class MiningDiagnostics:
    """Oddities seen while scanning, surfaced as warnings."""

    repeated_starts: int = 0
    unmatched_completes: int = 0
    negative_distances: int = 0


@dataclass
class SampleSet:
    """Raw samples per key, before aggregation."""

    samples: dict[DistanceKey, list[float]] = field(default_factory=dict)

    def add(self, key: DistanceKey, value: float) -> None:
        self.samples.setdefault(key, []).append(value)


def collect_samples(log: EventLog) -> tuple[SampleSet, MiningDiagnostics]:
    """Scan the log once, returning raw samples and diagnostics."""
    out = SampleSet()
    diag = MiningDiagnostics()
    for trace in log:
        open_starts: dict[str, float] = {}
        last_complete: tuple[str, float] | None = None
        for event in trace:
            ts = event.timestamp.timestamp()
            if event.is_start:
                if last_complete is not None:
                    origin_activity, origin_ts = last_complete
                    gap = ts - origin_ts
                    if gap < 0:
                        diag.negative_distances += 1
                    out.add(
                        DistanceKey.distance(origin_activity, event.activity), gap
                    )
                if event.activity in open_starts:
                    diag.repeated_starts += 1
                open_starts[event.activity] = ts
            elif event.is_complete:
                started = open_starts.pop(event.activity, None)
                if started is None:
                    diag.unmatched_completes += 1
                else:
                    out.add(DistanceKey.duration(event.activity), ts - started)
                last_complete = (event.activity, ts)
    return out, diag


def stats_of(samples: list[float], stddev_mode: str = POPULATION) -> DistanceStats:
    """Aggregate one sample list.

    Mean is a two-pass fsum; with a single sample the stddev is 0 in both
    modes.
    """
    if not samples:
        raise ValueError("stats_of requires at least one sample")
    n = len(samples)
    mean = math.fsum(samples) / n
    if n == 1:
        stddev = 0.0
    else:
        squared = math.fsum((x - mean) ** 2 for x in samples)
        divisor = n if stddev_mode == POPULATION else n - 1
        stddev = math.sqrt(squared / divisor)
    return DistanceStats(
        n=n, mean=mean, stddev=stddev, min=min(samples), max=max(samples)
    )


def mine_profile(log: EventLog, config: MinerConfig | None = None) -> TemporalProfile:
    """Mine a TemporalProfile from a training log.

    Deterministic for a given log: entries are emitted sorted by key, so the
    result is independent of hash seeds and intermediate dict order.
    """
    config = config or MinerConfig()
    sample_set, diag = collect_samples(log)
    if diag.repeated_starts:
        logger.warning(
            "%d repeated start events (open start overwritten)", diag.repeated_starts
        )
    if diag.negative_distances:
        logger.warning(
            "%d negative distance samples (source log violates ordering)",
            diag.negative_distances,
        )
    entries: dict[DistanceKey, DistanceStats] = {}
    for key in sorted(sample_set.samples, key=lambda k: k.to_string()):
        values = sample_set.samples[key]
        if key.kind == "distance" and len(values) < config.min_support:
            continue
        entries[key] = stats_of(values, config.stddev_mode)
    return TemporalProfile(entries=entries)

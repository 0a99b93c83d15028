"""Temporal conformance checking for event streams.

Mine a temporal profile (task durations, inter-event distances) from a
training log, infuse it into a block-structured process model, and check
live or replayed event streams against it. Deviations are z-scores weighted
per task; structural drift is scored by incremental prefix alignment.
"""

from .alignment import ModelStructure, PrefixAligner, align_events
from .checking import (
    CheckerConfig,
    CostReport,
    DeviationRecord,
    StreamChecker,
    TraceResult,
    check_log,
    check_stream,
    temporal_cost,
    z_score,
)
from .events import (
    COMPLETE,
    START,
    Event,
    EventLog,
    Trace,
    format_rfc3339,
    log_from_events,
    parse_rfc3339,
)
from .mining import MinerConfig, collect_samples, mine_profile, stats_of
from .model import (
    DistanceKey,
    DistanceStats,
    ModelValidationError,
    Parallel,
    Sequence,
    Task,
    TaskAnnotation,
    TemporalProfile,
    TimedProcessModel,
    Xor,
    load_model,
    load_profile,
    save_model,
    save_profile,
)
from .streams import (
    decode_event,
    encode_event,
    open_source,
    pacing_delays,
    read_events,
    replay,
)
from .xes import XesParseError, XesResult, parse_xes

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "START",
    "COMPLETE",
    "Event",
    "Trace",
    "EventLog",
    "log_from_events",
    "parse_rfc3339",
    "format_rfc3339",
    "XesResult",
    "XesParseError",
    "parse_xes",
    "Task",
    "Sequence",
    "Xor",
    "Parallel",
    "TaskAnnotation",
    "DistanceKey",
    "DistanceStats",
    "TemporalProfile",
    "TimedProcessModel",
    "ModelValidationError",
    "load_model",
    "save_model",
    "load_profile",
    "save_profile",
    "MinerConfig",
    "mine_profile",
    "collect_samples",
    "stats_of",
    "ModelStructure",
    "PrefixAligner",
    "align_events",
    "CheckerConfig",
    "DeviationRecord",
    "TraceResult",
    "CostReport",
    "StreamChecker",
    "z_score",
    "temporal_cost",
    "check_stream",
    "check_log",
    "encode_event",
    "decode_event",
    "read_events",
    "open_source",
    "replay",
    "pacing_delays",
]

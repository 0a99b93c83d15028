"""Block-structured process models carrying temporal annotations.

A model is a tree of Sequence / Xor / Parallel blocks over uniquely named
tasks. Each task can be annotated with a weight omega and a z-score
threshold kappa; individual inter-task distances can override both. A
TimedProcessModel bundles the control flow, the annotations and a mined
TemporalProfile, and resolves the effective (omega, kappa) for any profile
key: per-distance override first, then the task annotation (the target task
for distances), then the model defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, TextIO, Union

__all__ = [
    "Task",
    "Sequence",
    "Xor",
    "Parallel",
    "ModelNode",
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
]

DEFAULT_OMEGA = 1.0
DEFAULT_KAPPA = 3.0

DURATION = "duration"
DISTANCE = "distance"


class ModelValidationError(ValueError):
    """Raised when a model or profile violates its structural rules."""


@dataclass(frozen=True)
class Task:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ModelValidationError("task name must be non-empty")


@dataclass(frozen=True)
class Sequence:
    children: tuple["ModelNode", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ModelValidationError("sequence requires at least one child")


@dataclass(frozen=True)
class Xor:
    children: tuple["ModelNode", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ModelValidationError("xor requires at least one child")


@dataclass(frozen=True)
class Parallel:
    children: tuple["ModelNode", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ModelValidationError("parallel requires at least one child")


ModelNode = Union[Task, Sequence, Xor, Parallel]


def iter_tasks(node: ModelNode) -> Iterator[Task]:
    """All tasks of the tree in document order."""
    if isinstance(node, Task):
        yield node
    else:
        for child in node.children:
            yield from iter_tasks(child)


def task_names(node: ModelNode) -> list[str]:
    return [t.name for t in iter_tasks(node)]


def validate_root(node: ModelNode) -> None:
    names = task_names(node)
    if len(names) != len(set(names)):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ModelValidationError(f"duplicate task names in model: {dupes}")


@dataclass(frozen=True)
class TaskAnnotation:
    """Per-task weight and threshold; None means inherit from the defaults."""

    omega: float | None = None
    kappa: float | None = None

    def __post_init__(self) -> None:
        if self.omega is not None and self.omega < 0:
            raise ModelValidationError("omega must be nonnegative")
        if self.kappa is not None and self.kappa < 0:
            raise ModelValidationError("kappa must be nonnegative")


@dataclass(frozen=True, slots=True)
class DistanceKey:
    """Identifies one profiled quantity: a task duration or a distance.

    The pair is kept structured (kind, from, to) rather than concatenated so
    that activity names cannot collide across key boundaries.
    """

    kind: str
    from_activity: str
    to_activity: str

    def __post_init__(self) -> None:
        if self.kind not in (DURATION, DISTANCE):
            raise ModelValidationError(f"unknown key kind {self.kind!r}")
        if not self.from_activity or not self.to_activity:
            raise ModelValidationError("key activities must be non-empty")
        if self.kind == DURATION and self.from_activity != self.to_activity:
            raise ModelValidationError("duration keys name a single activity")

    @classmethod
    def duration(cls, activity: str) -> "DistanceKey":
        return cls(DURATION, activity, activity)

    @classmethod
    def distance(cls, from_activity: str, to_activity: str) -> "DistanceKey":
        return cls(DISTANCE, from_activity, to_activity)

    def to_string(self) -> str:
        if self.kind == DURATION:
            return f"duration:{self.from_activity}"
        return f"distance:{self.from_activity}->{self.to_activity}"

    @classmethod
    def from_string(cls, text: str) -> "DistanceKey":
        kind, _, rest = text.partition(":")
        if kind == DURATION and rest:
            return cls.duration(rest)
        if kind == DISTANCE and "->" in rest:
            source, _, target = rest.partition("->")
            return cls.distance(source, target)
        raise ModelValidationError(f"unparseable profile key {text!r}")


@dataclass(frozen=True, slots=True)
class DistanceStats:
    """Summary statistics of one profiled quantity, in seconds."""

    n: int
    mean: float
    stddev: float
    min: float
    max: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ModelValidationError("stats require at least one sample")
        if self.stddev < 0:
            raise ModelValidationError("stddev must be nonnegative")
        if not (self.min <= self.mean <= self.max):
            raise ModelValidationError(
                f"stats ordering violated: min {self.min} <= mean {self.mean} "
                f"<= max {self.max} must hold"
            )


@dataclass(frozen=True)
class TemporalProfile:
    """Mined duration and distance statistics, keyed by DistanceKey."""

    entries: Mapping[DistanceKey, DistanceStats] = field(default_factory=dict)

    def get(self, key: DistanceKey) -> DistanceStats | None:
        return self.entries.get(key)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: DistanceKey) -> bool:
        return key in self.entries

    def to_json_dict(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for key in sorted(self.entries, key=lambda k: k.to_string()):
            stats = self.entries[key]
            out[key.to_string()] = {
                "n": stats.n,
                "mean": stats.mean,
                "stddev": stats.stddev,
                "min": stats.min,
                "max": stats.max,
            }
        return out

    @classmethod
    def from_json_dict(cls, raw: Mapping[str, Mapping[str, float]]) -> "TemporalProfile":
        entries: dict[DistanceKey, DistanceStats] = {}
        for key_text, stats in raw.items():
            key = DistanceKey.from_string(key_text)
            entries[key] = DistanceStats(
                n=int(stats["n"]),
                mean=float(stats["mean"]),
                stddev=float(stats["stddev"]),
                min=float(stats["min"]),
                max=float(stats["max"]),
            )
        return cls(entries=entries)


@dataclass(frozen=True)
class TimedProcessModel:
    """Control flow plus temporal annotations plus a mined profile.

    Immutable; infusing a profile produces a new instance.
    """

    root: ModelNode
    annotations: Mapping[str, TaskAnnotation] = field(default_factory=dict)
    distance_overrides: Mapping[tuple[str, str], TaskAnnotation] = field(
        default_factory=dict
    )
    profile: TemporalProfile = field(default_factory=TemporalProfile)
    default_omega: float = DEFAULT_OMEGA
    default_kappa: float = DEFAULT_KAPPA

    def __post_init__(self) -> None:
        validate_root(self.root)
        if self.default_omega < 0 or self.default_kappa < 0:
            raise ModelValidationError("defaults must be nonnegative")
        known = set(task_names(self.root))
        for name in self.annotations:
            if name not in known:
                raise ModelValidationError(
                    f"annotation for unknown task {name!r}"
                )
        # Distance overrides may reference activities outside the control
        # flow: profiles are mined from logs whose alphabet can exceed the
        # modeled tasks, and the override attaches to the profile key.

    def tasks(self) -> list[str]:
        return task_names(self.root)

    def resolve(self, key: DistanceKey) -> tuple[float, float]:
        """Effective (omega, kappa) for a profile key, field by field."""
        omega: float | None = None
        kappa: float | None = None
        if key.kind == DISTANCE:
            override = self.distance_overrides.get(
                (key.from_activity, key.to_activity)
            )
            if override is not None:
                omega = override.omega
                kappa = override.kappa
        annotation = self.annotations.get(key.to_activity)
        if annotation is not None:
            if omega is None:
                omega = annotation.omega
            if kappa is None:
                kappa = annotation.kappa
        if omega is None:
            omega = self.default_omega
        if kappa is None:
            kappa = self.default_kappa
        return omega, kappa

    def infuse(self, profile: TemporalProfile) -> "TimedProcessModel":
        """Attach a mined profile, returning a new model."""
        return TimedProcessModel(
            root=self.root,
            annotations=dict(self.annotations),
            distance_overrides=dict(self.distance_overrides),
            profile=profile,
            default_omega=self.default_omega,
            default_kappa=self.default_kappa,
        )


def _node_to_json(node: ModelNode) -> dict:
    if isinstance(node, Task):
        return {"task": node.name}
    if isinstance(node, Sequence):
        return {"seq": [_node_to_json(c) for c in node.children]}
    if isinstance(node, Xor):
        return {"xor": [_node_to_json(c) for c in node.children]}
    return {"par": [_node_to_json(c) for c in node.children]}


def _node_from_json(raw: Mapping) -> ModelNode:
    if not isinstance(raw, Mapping) or len(raw) != 1:
        raise ModelValidationError(f"model node must have exactly one key: {raw!r}")
    (kind, payload), = raw.items()
    if kind == "task":
        return Task(name=str(payload))
    children = tuple(_node_from_json(child) for child in payload)
    if kind == "seq":
        return Sequence(children=children)
    if kind == "xor":
        return Xor(children=children)
    if kind == "par":
        return Parallel(children=children)
    raise ModelValidationError(f"unknown node kind {kind!r}")


def _annotation_to_json(annotation: TaskAnnotation) -> dict[str, float]:
    out: dict[str, float] = {}
    if annotation.omega is not None:
        out["omega"] = annotation.omega
    if annotation.kappa is not None:
        out["kappa"] = annotation.kappa
    return out


def _annotation_from_json(raw: Mapping) -> TaskAnnotation:
    return TaskAnnotation(
        omega=float(raw["omega"]) if "omega" in raw else None,
        kappa=float(raw["kappa"]) if "kappa" in raw else None,
    )


def model_to_json_dict(model: TimedProcessModel) -> dict:
    out: dict = {
        "root": _node_to_json(model.root),
        "annotations": {
            name: _annotation_to_json(ann)
            for name, ann in sorted(model.annotations.items())
        },
        "distance_overrides": [
            {"from": pair[0], "to": pair[1], **_annotation_to_json(ann)}
            for pair, ann in sorted(model.distance_overrides.items())
        ],
        "defaults": {"omega": model.default_omega, "kappa": model.default_kappa},
    }
    if len(model.profile):
        out["profile"] = model.profile.to_json_dict()
    return out


def model_from_json_dict(raw: Mapping) -> TimedProcessModel:
    if "root" not in raw:
        raise ModelValidationError("model file requires a 'root' node")
    defaults = raw.get("defaults", {})
    overrides: dict[tuple[str, str], TaskAnnotation] = {}
    for item in raw.get("distance_overrides", []):
        pair = (str(item["from"]), str(item["to"]))
        overrides[pair] = _annotation_from_json(item)
    profile = TemporalProfile.from_json_dict(raw.get("profile", {}))
    return TimedProcessModel(
        root=_node_from_json(raw["root"]),
        annotations={
            str(name): _annotation_from_json(ann)
            for name, ann in raw.get("annotations", {}).items()
        },
        distance_overrides=overrides,
        profile=profile,
        default_omega=float(defaults.get("omega", DEFAULT_OMEGA)),
        default_kappa=float(defaults.get("kappa", DEFAULT_KAPPA)),
    )


def _dump_json(payload: dict, destination: str | Path | TextIO) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text + "\n", encoding="utf-8")
    else:
        destination.write(text + "\n")


def _load_json(source: str | Path | TextIO) -> dict:
    if isinstance(source, (str, Path)):
        return json.loads(Path(source).read_text(encoding="utf-8"))
    return json.load(source)


def save_model(model: TimedProcessModel, destination: str | Path | TextIO) -> None:
    _dump_json(model_to_json_dict(model), destination)


def load_model(source: str | Path | TextIO) -> TimedProcessModel:
    return model_from_json_dict(_load_json(source))


def save_profile(profile: TemporalProfile, destination: str | Path | TextIO) -> None:
    _dump_json(profile.to_json_dict(), destination)


def load_profile(source: str | Path | TextIO) -> TemporalProfile:
    return TemporalProfile.from_json_dict(_load_json(source))

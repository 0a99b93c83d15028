"""Incremental structural conformance: prefix alignment at instance granularity.

The aligner explains a growing event prefix against a block-structured model
by shortest-path search over (model marking, prefix position). A marking
tracks each task as unstarted, started, or completed; a task's Start is
enabled only when the control flow allows it (inside a Sequence, a task
cannot start before its predecessor completes).

Moves and costs, at activity-instance granularity:

* synchronous: the observed event fires an enabled transition, cost 0. A
  Complete without a prior Start fires the whole instance at once.
* model insert: a whole unobserved task instance fired to enable an observed
  event, cost 1 per inserted instance. Started tasks cannot be completed by
  insertion; only untouched tasks can be inserted.
* log skip: the observed instance is not replayed on the model, cost 1 for
  the whole instance (its later Complete closes the paid instance for free).
  A skip is only available when no sequence of inserts can enable the event:
  the activity is absent from the model, already consumed, or blocked behind
  a started-but-incomplete task.

Synchronous moves being mandatory whenever insertion can enable them is what
makes an out-of-order instance cost its full two moves (the insert that
replaced it plus the skip of its late observation) while an early-started
instance inside a still-running predecessor costs a single skip.

The frontier of undominated (marking, cost) states is carried between
events, so each event extends the search instead of recomputing it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .events import Event
from .model import ModelNode, Parallel, Sequence, Task, TimedProcessModel, Xor, iter_tasks

__all__ = ["ModelStructure", "PrefixAligner", "align_events"]

UNSTARTED = 0
STARTED = 1
COMPLETED = 2

Marking = tuple[int, ...]
Skips = tuple[tuple[str, int], ...]


def _skips_add(skips: Skips, activity: str) -> Skips:
    counts = dict(skips)
    counts[activity] = counts.get(activity, 0) + 1
    return tuple(sorted(counts.items()))


def _skips_remove(skips: Skips, activity: str) -> Skips:
    counts = dict(skips)
    if counts.get(activity, 0) <= 1:
        counts.pop(activity, None)
    else:
        counts[activity] -= 1
    return tuple(sorted(counts.items()))


def _skips_count(skips: Skips, activity: str) -> int:
    return dict(skips).get(activity, 0)


@dataclass(frozen=True)
class _NodeView:
    """Analysis of one subtree under a marking."""

    startable: frozenset[int]
    complete: bool
    untouched: bool


class ModelStructure:
    """Immutable per-model machinery shared by all aligners of that model.

    Caches marking analyses and insertion closures; markings recur heavily
    across the traces of one stream.
    """

    def __init__(self, root: ModelNode):
        self.root = root
        self.task_index: dict[str, int] = {}
        for position, task in enumerate(iter_tasks(root)):
            self.task_index[task.name] = position
        self.size = len(self.task_index)
        self.initial_marking: Marking = (UNSTARTED,) * self.size
        self._startable_cache: dict[Marking, frozenset[int]] = {}
        self._insert_cache: dict[tuple[Marking, int], tuple[tuple[Marking, int], ...]] = {}

    @classmethod
    def of(cls, model: TimedProcessModel | ModelNode) -> "ModelStructure":
        root = model.root if isinstance(model, TimedProcessModel) else model
        return cls(root)

    def startable(self, marking: Marking) -> frozenset[int]:
        cached = self._startable_cache.get(marking)
        if cached is None:
            cached = self._analyze(self.root, marking, _Cursor()).startable
            self._startable_cache[marking] = cached
        return cached

    def _analyze(self, node: ModelNode, marking: Marking, cursor: "_Cursor") -> _NodeView:
        if isinstance(node, Task):
            idx = cursor.advance()
            state = marking[idx]
            return _NodeView(
                startable=frozenset((idx,)) if state == UNSTARTED else frozenset(),
                complete=state == COMPLETED,
                untouched=state == UNSTARTED,
            )
        views = [self._analyze(child, marking, cursor) for child in node.children]
        if isinstance(node, Sequence):
            startable: frozenset[int] = frozenset()
            complete = True
            for view in views:
                if not view.complete:
                    startable = view.startable
                    complete = False
                    break
            return _NodeView(
                startable=startable,
                complete=complete,
                untouched=all(v.untouched for v in views),
            )
        if isinstance(node, Parallel):
            merged = frozenset().union(*(v.startable for v in views))
            return _NodeView(
                startable=merged,
                complete=all(v.complete for v in views),
                untouched=all(v.untouched for v in views),
            )
        assert isinstance(node, Xor)
        touched = [v for v in views if not v.untouched]
        if not touched:
            merged = frozenset().union(*(v.startable for v in views))
            return _NodeView(startable=merged, complete=False, untouched=True)
        # Only one branch can ever be touched: entering a branch removes the
        # others from every startable set.
        chosen = touched[0]
        return _NodeView(
            startable=chosen.startable, complete=chosen.complete, untouched=False
        )

    def enable_by_inserts(
        self, marking: Marking, target: int
    ) -> tuple[tuple[Marking, int], ...]:
        """Markings from which `target` can start, reached by inserting whole
        unobserved instances; each with its insertion count. Empty when no
        insertion sequence can enable the target."""
        cache_key = (marking, target)
        cached = self._insert_cache.get(cache_key)
        if cached is not None:
            return cached
        results: dict[Marking, int] = {}
        visited = {marking}
        queue: deque[tuple[Marking, int]] = deque([(marking, 0)])
        while queue:
            current, inserted = queue.popleft()
            startable = self.startable(current)
            if target in startable:
                # BFS order: first arrival is the minimal insertion count.
                results.setdefault(current, inserted)
                continue
            for candidate in startable:
                nxt = _with_state(current, candidate, COMPLETED)
                if nxt not in visited:
                    visited.add(nxt)
                    queue.append((nxt, inserted + 1))
        found = tuple(results.items())
        self._insert_cache[cache_key] = found
        return found


class _Cursor:
    """Document-order task counter for tree analysis."""

    __slots__ = ("value",)

    def __init__(self) -> None:
        self.value = 0

    def advance(self) -> int:
        current = self.value
        self.value += 1
        return current


def _with_state(marking: Marking, index: int, state: int) -> Marking:
    return marking[:index] + (state,) + marking[index + 1 :]


class PrefixAligner:
    """Carries the alignment frontier of one trace across its events."""

    def __init__(self, structure: ModelStructure):
        self._structure = structure
        self._frontier: dict[tuple[Marking, Skips], int] = {
            (structure.initial_marking, ()): 0
        }
        self.cost = 0
        self.unknown_activities: set[str] = set()

    @property
    def frontier_size(self) -> int:
        return len(self._frontier)

    def step(self, event: Event) -> int:
        """Extend the frontier with one event; returns the current cost."""
        if not (event.is_start or event.is_complete):
            return self.cost
        structure = self._structure
        index = structure.task_index.get(event.activity)
        successors: dict[tuple[Marking, Skips], int] = {}

        def offer(marking: Marking, skips: Skips, cost: int) -> None:
            key = (marking, skips)
            known = successors.get(key)
            if known is None or cost < known:
                successors[key] = cost

        for (marking, skips), cost in self._frontier.items():
            if event.is_start:
                if index is None:
                    self.unknown_activities.add(event.activity)
                    offer(marking, _skips_add(skips, event.activity), cost + 1)
                    continue
                targets = structure.enable_by_inserts(marking, index)
                if targets:
                    for enabled_marking, inserted in targets:
                        offer(
                            _with_state(enabled_marking, index, STARTED),
                            skips,
                            cost + inserted,
                        )
                else:
                    offer(marking, _skips_add(skips, event.activity), cost + 1)
            else:  # complete
                if index is None:
                    if _skips_count(skips, event.activity):
                        offer(marking, _skips_remove(skips, event.activity), cost)
                    else:
                        self.unknown_activities.add(event.activity)
                        offer(marking, skips, cost + 1)
                    continue
                matched = False
                if _skips_count(skips, event.activity):
                    offer(marking, _skips_remove(skips, event.activity), cost)
                    matched = True
                if marking[index] == STARTED:
                    offer(_with_state(marking, index, COMPLETED), skips, cost)
                    matched = True
                if not matched:
                    targets = structure.enable_by_inserts(marking, index)
                    if targets:
                        for enabled_marking, inserted in targets:
                            offer(
                                _with_state(enabled_marking, index, COMPLETED),
                                skips,
                                cost + inserted,
                            )
                    else:
                        offer(marking, skips, cost + 1)

        self._frontier = successors
        self.cost = min(successors.values())
        return self.cost


def align_events(
    model: TimedProcessModel | ModelNode, events: list[Event] | tuple[Event, ...]
) -> int:
    """Convenience: align a whole prefix at once, returning its cost."""
    aligner = PrefixAligner(ModelStructure.of(model))
    cost = 0
    for event in events:
        cost = aligner.step(event)
    return cost

"""Model trees, annotations, profiles, and their JSON round-trips."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tempograph.model import (
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
    model_from_json_dict,
    model_to_json_dict,
    save_model,
    save_profile,
    task_names,
)

from conftest import stats


def test_empty_children_rejected():
    for cls in (Sequence, Xor, Parallel):
        with pytest.raises(ModelValidationError):
            cls(children=())


def test_duplicate_task_names_rejected():
    with pytest.raises(ModelValidationError):
        TimedProcessModel(root=Sequence(children=(Task("A"), Task("A"))))


def test_task_names_in_document_order(fig1_model):
    assert task_names(fig1_model.root) == ["A", "B", "C", "D", "E"]


def test_duration_key_requires_matching_activities():
    with pytest.raises(ModelValidationError):
        DistanceKey(kind="duration", from_activity="A", to_activity="B")


def test_distance_key_string_round_trip():
    for key in (
        DistanceKey.duration("Validate request"),
        DistanceKey.distance("A", "B"),
        DistanceKey.distance("with:colon", "other"),
    ):
        assert DistanceKey.from_string(key.to_string()) == key


def test_distance_stats_orders_bounds():
    with pytest.raises(ModelValidationError):
        DistanceStats(n=1, mean=5.0, stddev=1.0, min=6.0, max=10.0)


def test_annotation_rejects_negative():
    with pytest.raises(ModelValidationError):
        TaskAnnotation(omega=-1.0)


def test_annotations_must_name_model_tasks():
    with pytest.raises(ModelValidationError):
        TimedProcessModel(
            root=Sequence(children=(Task("A"),)),
            annotations={"nope": TaskAnnotation(kappa=1.0)},
        )


def test_resolve_precedence(worked_model):
    # distance override beats the to-task annotation and the defaults
    omega, kappa = worked_model.resolve(DistanceKey.distance("A", "B"))
    assert (omega, kappa) == (2.0, 2.0)
    # B's annotation only sets kappa; omega falls to the default
    omega, kappa = worked_model.resolve(DistanceKey.duration("B"))
    assert (omega, kappa) == (1.0, 2.0)
    # untouched task: both defaults
    omega, kappa = worked_model.resolve(DistanceKey.duration("A"))
    assert (omega, kappa) == (1.0, 3.0)


def test_resolve_unmodeled_activity_uses_defaults(worked_model):
    omega, kappa = worked_model.resolve(DistanceKey.duration("Z"))
    assert (omega, kappa) == (1.0, 3.0)


def test_infuse_replaces_profile(worked_model):
    fresh = TemporalProfile(entries={DistanceKey.duration("C"): stats(1.0, 0.1)})
    infused = worked_model.infuse(fresh)
    assert DistanceKey.duration("C") in infused.profile
    assert DistanceKey.duration("A") not in infused.profile
    # annotations survive infusion
    assert infused.resolve(DistanceKey.duration("B"))[1] == 2.0


def test_model_json_round_trip(worked_model):
    data = model_to_json_dict(worked_model)
    back = model_from_json_dict(data)
    assert back.root == worked_model.root
    assert back.annotations == worked_model.annotations
    assert back.distance_overrides == worked_model.distance_overrides
    assert back.profile.entries == worked_model.profile.entries


def test_model_file_round_trip(tmp_path, worked_model):
    path = tmp_path / "model.json"
    save_model(worked_model, path)
    assert load_model(path) == worked_model


def test_profile_file_round_trip(tmp_path, worked_profile):
    path = tmp_path / "profile.json"
    save_profile(worked_profile, path)
    assert load_profile(path).entries == worked_profile.entries


names = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"),
    min_size=1,
    max_size=12,
).filter(lambda s: "->" not in s)


@st.composite
def model_trees(draw):
    """Random small trees with unique task names."""
    pool = list(draw(st.lists(names, min_size=1, max_size=6, unique=True)))

    def build(level: int):
        if not pool:
            return None
        if level >= 2 or draw(st.booleans()):
            return Task(pool.pop())
        cls = draw(st.sampled_from([Sequence, Xor, Parallel]))
        children = [build(level + 1) for _ in range(draw(st.integers(1, 3)))]
        children = [c for c in children if c is not None]
        return cls(children=tuple(children)) if children else None

    tree = build(0)
    return tree if tree is not None else Task("fallback")


@given(model_trees())
def test_any_tree_round_trips(tree):
    model = TimedProcessModel(root=tree)
    assert model_from_json_dict(model_to_json_dict(model)) == model


@given(
    st.lists(
        st.tuples(names, names, st.floats(0, 1e6), st.floats(0, 1e6)),
        max_size=8,
    )
)
def test_profile_json_round_trip(rows):
    entries = {}
    for a, b, mean, spread in rows:
        entries[DistanceKey.distance(a, b)] = DistanceStats(
            n=3, mean=mean, stddev=spread, min=mean, max=mean + spread
        )
    profile = TemporalProfile(entries=entries)
    assert TemporalProfile.from_json_dict(profile.to_json_dict()).entries == entries

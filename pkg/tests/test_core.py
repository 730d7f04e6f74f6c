import dataclasses

import pytest

from eossched.core import (
    ParseError,
    TaskSpec,
    VisibleWindow,
    deserialize_instance,
    deserialize_schedule,
    instance_digest,
    serialize_instance,
    serialize_schedule,
    validate_instance,
)
from eossched.core import Assignment, Schedule, sort_assignments
from conftest import make_fuzz_instance


def test_toy_instance_validates_clean(toy_instance):
    assert validate_instance(toy_instance) == []


def test_window_beyond_horizon_is_flagged(toy_instance):
    bad_window = VisibleWindow("A", "S1", 8.0, 12.0, fixed_roll_deg=0.0)
    bad = dataclasses.replace(
        toy_instance, visible_windows=toy_instance.visible_windows + (bad_window,))
    report = validate_instance(bad)
    rules = [(v.entity, v.rule) for v in report]
    widx = len(bad.visible_windows) - 1
    assert (f"window[{widx}]", "window_within_horizon") in rules


def test_duplicate_task_id_is_flagged(toy_instance):
    dup = toy_instance.tasks[0]
    bad = dataclasses.replace(toy_instance, tasks=toy_instance.tasks + (dup,))
    report = validate_instance(bad)
    assert any(v.rule == "task_id_unique" and v.entity == dup.id for v in report)


def test_attribute_bounds_are_flagged(toy_instance):
    bad_task = TaskSpec("Z", 95.0, 200.0, 0, 11, 10)
    bad = dataclasses.replace(toy_instance, tasks=toy_instance.tasks + (bad_task,))
    rules = {v.rule for v in validate_instance(bad) if v.entity == "Z"}
    assert rules == {"latitude_range", "longitude_range", "priority_range",
                     "profit_range"}


def test_roundtrip_identity(toy_instance):
    data = serialize_instance(toy_instance)
    again = deserialize_instance(data)
    assert again == toy_instance
    assert serialize_instance(again) == data


@pytest.mark.parametrize("seed", range(5))
def test_roundtrip_on_fuzzed_instances(seed):
    inst = make_fuzz_instance(seed)
    assert deserialize_instance(serialize_instance(inst)) == inst


def test_canonical_bytes_are_deterministic(toy_instance):
    from conftest import TOY_DURATIONS, TOY_WINDOWS
    from eossched.descriptors import build_synthetic_instance
    rebuilt = build_synthetic_instance(TOY_WINDOWS, TOY_DURATIONS, 1.0, 10.0)
    assert instance_digest(rebuilt) == instance_digest(toy_instance)
    assert serialize_instance(rebuilt) == serialize_instance(toy_instance)


def test_truncated_file_raises_parse_error(toy_instance):
    data = serialize_instance(toy_instance)
    with pytest.raises(ParseError):
        deserialize_instance(data[: len(data) // 2])


def test_wrong_kind_raises(toy_instance):
    data = serialize_instance(toy_instance)
    with pytest.raises(ParseError, match="kind"):
        deserialize_schedule(data)


def test_schedule_roundtrip(toy_instance):
    sched = Schedule(
        instance_id=toy_instance.id,
        assignments=sort_assignments([
            Assignment("S1", "A", 0, 0.0),
            Assignment("S2", "C", 4, 6.0),
        ]),
        solver="manual", wall_time_s=0.25, notes=("check",),
    )
    data = serialize_schedule(sched)
    assert deserialize_schedule(data) == sched


def test_opportunities_lie_inside_parent_windows(toy_instance):
    for opp in toy_instance.opportunities:
        win = toy_instance.visible_windows[opp.window_index]
        assert win.start_s <= opp.start_s and opp.end_s <= win.end_s
    assert validate_instance(toy_instance) == []

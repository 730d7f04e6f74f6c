import itertools
import random

import pytest

from eossched import feasibility as feas
from eossched.core import Assignment, Schedule, sort_assignments
from eossched.descriptors import build_synthetic_instance
from conftest import make_agile_instance, make_fuzz_instance


def _schedule(instance, assignments):
    return Schedule(instance.id, sort_assignments(assignments), solver="test")


def _by_slot(instance):
    """(task_id, start) -> candidate assignment."""
    return {(c.task_id, c.start_s): c for c in feas.candidate_assignments(instance)}


def test_toy_candidate_counts(toy_instance):
    cands = feas.candidate_assignments(toy_instance)
    assert len(cands) == 6
    per_task = {}
    for c in cands:
        per_task[c.task_id] = per_task.get(c.task_id, 0) + 1
    assert per_task == {"A": 3, "B": 1, "C": 2}


def test_empty_instance_has_no_candidates():
    empty = build_synthetic_instance([], {}, 1.0, 10.0, satellites=["S1"])
    assert feas.candidate_assignments(empty) == []


def test_touching_intervals_conflict(toy_instance):
    slots = _by_slot(toy_instance)
    verdict = feas.compatible(slots[("A", 0.0)], slots[("B", 3.0)], toy_instance)
    assert not verdict.compatible
    assert verdict.reason is feas.Reason.TEMPORAL_OVERLAP


def test_cross_satellite_is_ok(toy_instance):
    slots = _by_slot(toy_instance)
    verdict = feas.compatible(slots[("A", 0.0)], slots[("C", 6.0)], toy_instance)
    assert verdict.compatible and verdict.reason is feas.Reason.OK


def test_same_task_conflicts(toy_instance):
    slots = _by_slot(toy_instance)
    verdict = feas.compatible(slots[("A", 0.0)], slots[("A", 1.0)], toy_instance)
    assert verdict.reason is feas.Reason.SAME_TASK


def test_wide_gap_is_ok():
    inst = build_synthetic_instance(
        [("X", "S1", 0.0, 10.0), ("Y", "S1", 110.0, 120.0)],
        {"X": 10, "Y": 10}, transition_const=5.0, horizon_s=200.0)
    a, b = feas.candidate_assignments(inst)
    assert feas.compatible(a, b, inst).compatible  # gap 100 >= 5


def test_transition_violation_reason():
    inst = build_synthetic_instance(
        [("X", "S1", 0.0, 10.0), ("Y", "S1", 12.0, 22.0)],
        {"X": 10, "Y": 10}, transition_const=5.0, horizon_s=200.0)
    a, b = feas.candidate_assignments(inst)
    verdict = feas.compatible(a, b, inst)  # gap 2 < 5
    assert verdict.reason is feas.Reason.TRANSITION_VIOLATION


@pytest.mark.parametrize("seed", range(8))
def test_compatibility_is_symmetric(seed):
    inst = make_fuzz_instance(seed)
    cands = feas.candidate_assignments(inst)
    rng = random.Random(seed)
    for _ in range(30):
        if len(cands) < 2:
            return
        a, b = rng.sample(cands, 2)
        assert (feas.compatible(a, b, inst).compatible
                == feas.compatible(b, a, inst).compatible)


def test_empty_schedule_has_zero_ledger(toy_instance):
    ledger = feas.resource_usage(_schedule(toy_instance, []), toy_instance)
    assert all(v == 0.0 for vals in ledger.energy.values() for v in vals)
    assert all(v == 0.0 for vals in ledger.memory.values() for v in vals)


def test_single_observation_ledger():
    inst = build_synthetic_instance([("X", "S1", 0.0, 15.0)], {"X": 10},
                                    1.0, 100.0)
    cand = feas.candidate_assignments(inst)[0]
    ledger = feas.resource_usage(_schedule(inst, [cand]), inst)
    assert ledger.energy["S1"][0] == pytest.approx(10.0)  # nadir start: no slew
    assert ledger.memory["S1"][0] == pytest.approx(10.0)


def test_slew_energy_charged_between_observations():
    inst = make_agile_instance([(0.0, 0.0, 0.0), (10.0, 10.0, 0.0)],
                               gaps=[0.0, 100.0], duration=10)
    a, b = feas.candidate_assignments(inst)
    ledger = feas.resource_usage(_schedule(inst, [a, b]), inst)
    # one segment: 2 observations of 10 s plus a 20 degree slew into the second
    assert sum(ledger.energy["SAT"]) == pytest.approx(10.0 + 10.0 + 20.0)
    assert sum(ledger.memory["SAT"]) == pytest.approx(20.0)


def test_toy_schedule_passes(toy_instance):
    slots = _by_slot(toy_instance)
    schedule = _schedule(toy_instance, [slots[("A", 0.0)], slots[("C", 6.0)]])
    report = feas.validate_schedule(schedule, toy_instance)
    assert report.ok and report.violations == ()


def test_duplicate_task_fails_uniqueness(toy_instance):
    slots = _by_slot(toy_instance)
    schedule = _schedule(toy_instance, [slots[("A", 0.0)], slots[("A", 5.0)]])
    report = feas.validate_schedule(schedule, toy_instance)
    assert not report.ok
    assert any(v.rule == "task_uniqueness" and v.entity == "A"
               for v in report.violations)


def test_energy_budget_violation_reported():
    windows = [(f"T{k}", "S1", 40.0 * k, 40.0 * k + 10.0) for k in range(4)]
    inst = build_synthetic_instance(windows, {f"T{k}": 10 for k in range(4)},
                                    transition_const=1.0, horizon_s=300.0,
                                    energy_per_orbit=25.0)
    cands = feas.candidate_assignments(inst)
    report = feas.validate_schedule(_schedule(inst, cands), inst)
    assert not report.ok
    assert any(v.rule == "energy_budget" for v in report.violations)
    # two observations fit the 25-unit budget
    ok = feas.validate_schedule(_schedule(inst, cands[:2]), inst)
    assert ok.ok


def test_unknown_ids_raise_structural_error(toy_instance):
    ghost = Assignment("S9", "A", 0, 0.0)
    with pytest.raises(feas.StructuralError):
        feas.validate_schedule(_schedule(toy_instance, [ghost]), toy_instance)
    wrong_start = Assignment("S1", "A", 0, 2.5)
    with pytest.raises(feas.StructuralError):
        feas.validate_schedule(_schedule(toy_instance, [wrong_start]), toy_instance)


def test_empty_schedule_always_passes(toy_instance):
    assert feas.validate_schedule(_schedule(toy_instance, []), toy_instance).ok


@pytest.mark.parametrize("seed", range(6))
def test_downward_closure(seed):
    inst = make_fuzz_instance(seed)
    cands = feas.candidate_assignments(inst)
    rng = random.Random(seed + 1)
    # build some feasible schedule greedily
    chosen = []
    for c in cands:
        trial = chosen + [c]
        if feas.validate_schedule(_schedule(inst, trial), inst).ok:
            chosen = trial
    for _ in range(25):
        subset = [c for c in chosen if rng.random() < 0.6]
        assert feas.validate_schedule(_schedule(inst, subset), inst).ok


def _oracle_feasible(instance, assignments):
    """Independent check of the formal conditions on synthetic instances
    (constant transition, zero slew): plain interval and budget arithmetic."""
    const = instance.transition_override_s
    tasks = {t.id: t for t in instance.tasks}
    seen = set()
    for a in assignments:
        if a.task_id in seen:
            return False
        seen.add(a.task_id)
    for a, b in itertools.combinations(assignments, 2):
        if a.satellite_id != b.satellite_id:
            continue
        sa, ea = a.start_s, a.start_s + tasks[a.task_id].duration_s
        sb, eb = b.start_s, b.start_s + tasks[b.task_id].duration_s
        if not (sb >= ea + const or sa >= eb + const):
            return False
    for sat in instance.satellites:
        used = sum(tasks[a.task_id].duration_s for a in assignments
                   if a.satellite_id == sat.id)
        if used > sat.capacities.energy_per_orbit + 1e-9:
            return False
        if used > sat.capacities.storage_per_orbit + 1e-9:
            return False
    return True


@pytest.mark.parametrize("seed", range(5))
def test_validator_matches_bruteforce_oracle(seed):
    inst = make_fuzz_instance(seed, max_candidates=10)
    cands = feas.candidate_assignments(inst)
    for bits in range(2 ** len(cands)):
        subset = [cands[i] for i in range(len(cands)) if bits >> i & 1]
        ours = feas.validate_schedule(_schedule(inst, subset), inst).ok
        assert ours == _oracle_feasible(inst, subset), subset

"""Formal feasibility model shared by every solver and the evaluator.

A schedule is feasible when (i) every pair of assignments is compatible —
no temporal overlap and no transition-time shortfall on a shared satellite —
(ii) each task is executed at most once, and (iii) per-orbit energy and
storage budgets hold on every orbit segment.

Intervals are closed: two same-satellite observations that merely touch
still need transition time between them (gap 0), so they conflict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from . import kinematics
from .astro import orbital_period_s
from .core import Assignment, Instance, Schedule, Violation


class Reason(str, Enum):
    OK = "ok"
    SAME_TASK = "same_task"
    TEMPORAL_OVERLAP = "temporal_overlap"
    TRANSITION_VIOLATION = "transition_violation"


@dataclass(frozen=True)
class CompatibilityVerdict:
    compatible: bool
    reason: Reason


class StructuralError(ValueError):
    """An assignment references ids or slots that do not exist in the instance.

    Distinct from infeasibility: a structurally broken schedule cannot even
    be checked against the feasibility conditions.
    """


def candidate_assignments(instance: Instance) -> list[Assignment]:
    """One candidate per available opportunity."""
    return [
        Assignment(opp.satellite_id, opp.task_id, idx, opp.start_s)
        for idx, opp in enumerate(instance.opportunities)
    ]


def assignment_interval(a: Assignment, instance: Instance) -> tuple[float, float]:
    opp = instance.opportunities[a.opportunity_index]
    return (opp.start_s, opp.end_s)


def compatible(a: Assignment, b: Assignment, instance: Instance) -> CompatibilityVerdict:
    """Pairwise compatibility under overlap, transition and exclusivity rules."""
    if a.task_id == b.task_id:
        return CompatibilityVerdict(False, Reason.SAME_TASK)
    if a.satellite_id != b.satellite_id:
        return CompatibilityVerdict(True, Reason.OK)
    sa, ea = assignment_interval(a, instance)
    sb, eb = assignment_interval(b, instance)
    if sa <= sb:
        first, second = (a, b)
        gap = sb - ea
    else:
        first, second = (b, a)
        gap = sa - eb
    if gap < 0 or math.isclose(gap, 0.0, abs_tol=1e-12):
        return CompatibilityVerdict(False, Reason.TEMPORAL_OVERLAP)
    if gap < kinematics.min_separation(first, second, instance):
        return CompatibilityVerdict(False, Reason.TRANSITION_VIOLATION)
    return CompatibilityVerdict(True, Reason.OK)


@dataclass
class ResourceLedger:
    """Per (satellite, orbit segment) energy and memory usage.

    Segments are fixed slices of one orbital period starting at t = 0;
    memory and energy budgets both apply per segment (storage is implicitly
    flushed at segment boundaries).
    """

    period_s: dict[str, float] = field(default_factory=dict)
    segment_count: dict[str, int] = field(default_factory=dict)
    energy: dict[str, list[float]] = field(default_factory=dict)
    memory: dict[str, list[float]] = field(default_factory=dict)

    def segment_boundaries(self, satellite_id: str) -> list[float]:
        period = self.period_s[satellite_id]
        return [k * period for k in range(self.segment_count[satellite_id] + 1)]


def empty_ledger(instance: Instance) -> ResourceLedger:
    ledger = ResourceLedger()
    for sat in instance.satellites:
        period = orbital_period_s(sat.elements.semi_major_axis_km)
        count = max(1, math.ceil(instance.horizon_s / period))
        ledger.period_s[sat.id] = period
        ledger.segment_count[sat.id] = count
        ledger.energy[sat.id] = [0.0] * count
        ledger.memory[sat.id] = [0.0] * count
    return ledger


def segment_of(ledger: ResourceLedger, satellite_id: str, t_s: float) -> int:
    seg = int(t_s // ledger.period_s[satellite_id])
    return min(seg, ledger.segment_count[satellite_id] - 1)


def resource_usage(schedule: Schedule, instance: Instance) -> ResourceLedger:
    """Accumulate energy and memory per orbit segment.

    Each observation charges ``duration * obs_energy_rate`` plus the slew
    from the previous observation on the same satellite (from nadir for the
    first), booked in the segment containing the observation start.
    """
    ledger = empty_ledger(instance)
    sats = instance.satellite_map()
    tasks = instance.task_map()
    by_sat: dict[str, list[Assignment]] = {}
    for a in schedule.assignments:
        by_sat.setdefault(a.satellite_id, []).append(a)
    for sat_id, assigns in by_sat.items():
        assigns.sort(key=lambda a: a.start_s)
        rates = sats[sat_id].rates
        prev_att = (0.0, 0.0, 0.0)
        for a in assigns:
            att_start, att_end = kinematics.assignment_attitudes(a, instance)
            dg_in = kinematics.delta_g(prev_att, att_start)
            seg = segment_of(ledger, sat_id, a.start_s)
            duration = tasks[a.task_id].duration_s
            ledger.energy[sat_id][seg] += duration * rates.obs_energy_rate
            ledger.energy[sat_id][seg] += dg_in * rates.slew_energy_rate
            ledger.memory[sat_id][seg] += duration * rates.obs_memory_rate
            prev_att = att_end
    return ledger


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    violations: tuple[Violation, ...] = ()


def _check_structure(schedule: Schedule, instance: Instance) -> None:
    sats = instance.satellite_map()
    tasks = instance.task_map()
    n_opps = len(instance.opportunities)
    for a in schedule.assignments:
        if a.satellite_id not in sats:
            raise StructuralError(f"unknown satellite id '{a.satellite_id}'")
        if a.task_id not in tasks:
            raise StructuralError(f"unknown task id '{a.task_id}'")
        if not 0 <= a.opportunity_index < n_opps:
            raise StructuralError(f"opportunity index {a.opportunity_index} out of range")
        opp = instance.opportunities[a.opportunity_index]
        if opp.task_id != a.task_id or opp.satellite_id != a.satellite_id:
            raise StructuralError(
                f"assignment ids do not match opportunity {a.opportunity_index}")
        if abs(opp.start_s - a.start_s) > 1e-9:
            raise StructuralError(
                f"assignment start {a.start_s} differs from opportunity start {opp.start_s}")


def validate_schedule(schedule: Schedule, instance: Instance) -> FeasibilityReport:
    """PASS iff all pairs are compatible, tasks are unique and budgets hold.

    The report lists every violated condition with its witnessing pair, task
    or segment.  Unknown ids raise ``StructuralError`` instead.
    """
    _check_structure(schedule, instance)
    violations: list[Violation] = []

    assigns = list(schedule.assignments)
    for i in range(len(assigns)):
        for j in range(i + 1, len(assigns)):
            verdict = compatible(assigns[i], assigns[j], instance)
            if not verdict.compatible and verdict.reason is not Reason.SAME_TASK:
                violations.append(Violation(
                    f"pair({assigns[i].task_id}@{assigns[i].start_s},"
                    f"{assigns[j].task_id}@{assigns[j].start_s})",
                    verdict.reason.value))

    counts: dict[str, int] = {}
    for a in assigns:
        counts[a.task_id] = counts.get(a.task_id, 0) + 1
    for task_id, n in sorted(counts.items()):
        if n > 1:
            violations.append(Violation(task_id, "task_uniqueness", f"assigned {n} times"))

    ledger = resource_usage(schedule, instance)
    sats = instance.satellite_map()
    for sat_id in sorted(ledger.energy):
        cap = sats[sat_id].capacities
        for seg, used in enumerate(ledger.energy[sat_id]):
            if used > cap.energy_per_orbit + 1e-9:
                violations.append(Violation(
                    f"{sat_id}/segment[{seg}]", "energy_budget",
                    f"used={used} budget={cap.energy_per_orbit}"))
        for seg, used in enumerate(ledger.memory[sat_id]):
            if used > cap.storage_per_orbit + 1e-9:
                violations.append(Violation(
                    f"{sat_id}/segment[{seg}]", "storage_budget",
                    f"used={used} budget={cap.storage_per_orbit}"))

    return FeasibilityReport(ok=not violations, violations=tuple(violations))

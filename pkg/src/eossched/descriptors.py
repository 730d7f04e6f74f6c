"""Structural-difficulty descriptors computed before any optimisation.

Five task-oriented values describe opportunity density, constraint,
interference, conflict severity and elasticity; five satellite-oriented
values describe timeline contention, conflict spread, overload, conflict
depth and excess demand.  Scenario-level values are plain means over the
instances generated for one scenario.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, asdict
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kinematics
from .astro import derive_opportunities
from .core import (
    AttitudeEnvelope,
    AvailableOpportunity,
    Instance,
    OrbitalElements,
    Platform,
    Provenance,
    ResourceCapacities,
    SatelliteSpec,
    TaskSpec,
    VisibleWindow,
)

LEVEL_INSTANCE = "instance"
LEVEL_SCENARIO = "scenario"

_FIELDS = ("gamma_ao", "gamma_oc", "gamma_ti", "gamma_at", "gamma_te",
           "lambda_oc", "lambda_cs", "lambda_to", "lambda_ac", "lambda_ed")


@dataclass(frozen=True)
class DescriptorReport:
    gamma_ao: float
    gamma_oc: float
    gamma_ti: float
    gamma_at: float
    gamma_te: float
    lambda_oc: float
    lambda_cs: float
    lambda_to: float
    lambda_ac: float
    lambda_ed: float
    analysis_step_s: float
    level: str = LEVEL_INSTANCE
    degenerate: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def default_analysis_step(instance: Instance) -> float:
    """1 s grids stay exact for small instances; larger ones use 10 s."""
    return 1.0 if len(instance.tasks) <= 200 else 10.0


def _pair_transition(win_a: VisibleWindow, win_b: VisibleWindow,
                     instance: Instance) -> float:
    """Required separation when an observation in ``win_a`` precedes one in
    ``win_b``; evaluated once per window pair from the edge attitudes."""
    if instance.transition_override_s is not None:
        return instance.transition_override_s
    if instance.platform is Platform.NON_AGILE:
        return kinematics.NON_AGILE_TRANSITION_S
    sat = instance.satellite_map()[win_a.satellite_id]
    profile = kinematics.AgilityProfile.builtin(sat.agility_profile)
    att_a = kinematics.window_attitude(win_a, win_a.end_s)
    att_b = kinematics.window_attitude(win_b, win_b.start_s)
    return kinematics.transition_time(kinematics.delta_g(att_a, att_b), profile)


def _slots_by_window(instance: Instance) -> dict[int, np.ndarray]:
    slots: dict[int, list[float]] = {}
    for opp in instance.opportunities:
        slots.setdefault(opp.window_index, []).append(opp.start_s)
    return {idx: np.sort(np.asarray(starts)) for idx, starts in slots.items()}


def _max_reach_s(instance: Instance) -> float:
    """Upper bound on any pairwise transition requirement; window pairs
    separated by more than this can never conflict."""
    if instance.transition_override_s is not None:
        return instance.transition_override_s
    if instance.platform is Platform.NON_AGILE:
        return kinematics.NON_AGILE_TRANSITION_S
    reach = 0.0
    for sat in instance.satellites:
        profile = kinematics.AgilityProfile.builtin(sat.agility_profile)
        dg_max = 2.0 * sat.envelope.max_roll_deg + 2.0 * sat.envelope.max_pitch_deg
        reach = max(reach, kinematics.transition_time(dg_max, profile))
    return reach


def _pair_conflicts(a: np.ndarray, da: float, b: np.ndarray, db: float,
                    trans_ab: float, trans_ba: float) -> int:
    """Conflicting slot pairs between two windows (total minus compatible)."""
    total = len(a) * len(b)
    ok_ab = int(np.sum(len(b) - np.searchsorted(b, a + da + trans_ab - 1e-9,
                                                side="left")))
    ok_ba = int(np.sum(len(a) - np.searchsorted(a, b + db + trans_ba - 1e-9,
                                                side="left")))
    return total - ok_ab - ok_ba


def _conflict_counts(instance: Instance) -> tuple[dict[tuple[str, str], int],
                                                  dict[tuple[str, str], int]]:
    """Per task pair: comparable and conflicting opportunity-pair counts.

    Two opportunities are comparable when they sit on the same satellite
    timeline; they conflict when they overlap (or touch) or when the gap
    between them is shorter than the required transition time.  Window pairs
    further apart than the worst-case transition are all-compatible, so only
    temporally close pairs are counted at slot level.
    """
    durations = {t.id: float(t.duration_s) for t in instance.tasks}
    slots = _slots_by_window(instance)
    by_sat: dict[str, list[int]] = {}
    for idx in slots:
        by_sat.setdefault(instance.visible_windows[idx].satellite_id, []).append(idx)
    reach = _max_reach_s(instance)

    comparable: dict[tuple[str, str], int] = {}
    conflicting: dict[tuple[str, str], int] = {}
    for sat_id, win_indices in by_sat.items():
        # comparable pairs: product of per-task slot totals on this timeline
        totals: dict[str, int] = {}
        for idx in win_indices:
            task = instance.visible_windows[idx].task_id
            totals[task] = totals.get(task, 0) + len(slots[idx])
        task_ids = sorted(totals)
        for ta, tb in itertools.combinations(task_ids, 2):
            comparable[(ta, tb)] = comparable.get((ta, tb), 0) + totals[ta] * totals[tb]

        # conflicting pairs: sweep temporally close window pairs
        ordered = sorted(win_indices,
                         key=lambda idx: instance.visible_windows[idx].start_s)
        for pos, ia in enumerate(ordered):
            win_a = instance.visible_windows[ia]
            for ib in ordered[pos + 1:]:
                win_b = instance.visible_windows[ib]
                if win_b.start_s > win_a.end_s + reach:
                    break
                if win_a.task_id == win_b.task_id:
                    continue
                key = tuple(sorted((win_a.task_id, win_b.task_id)))
                n = _pair_conflicts(
                    slots[ia], durations[win_a.task_id],
                    slots[ib], durations[win_b.task_id],
                    _pair_transition(win_a, win_b, instance),
                    _pair_transition(win_b, win_a, instance))
                if n:
                    conflicting[key] = conflicting.get(key, 0) + n
    return comparable, conflicting


def task_descriptors(instance: Instance) -> tuple[float, float, float, float, float]:
    """(gamma_ao, gamma_oc, gamma_ti, gamma_at, gamma_te)."""
    n_tasks = len(instance.tasks)
    if n_tasks == 0:
        return (0.0, 0.0, 0.0, 0.0, 0.0)

    opp_count = {t.id: 0 for t in instance.tasks}
    for opp in instance.opportunities:
        opp_count[opp.task_id] += 1
    gamma_ao = sum(opp_count.values()) / n_tasks
    gamma_oc = sum(1 for v in opp_count.values() if v <= 2) / n_tasks

    win_count = {t.id: 0 for t in instance.tasks}
    sat_sets: dict[str, set[str]] = {t.id: set() for t in instance.tasks}
    for win in instance.visible_windows:
        win_count[win.task_id] += 1
        sat_sets[win.task_id].add(win.satellite_id)
    gamma_te = sum(len(sat_sets[t.id]) * win_count[t.id]
                   for t in instance.tasks) / n_tasks

    if n_tasks < 2:
        return (gamma_ao, gamma_oc, 0.0, 0.0, gamma_te)

    comparable, conflicting = _conflict_counts(instance)
    n_pairs = n_tasks * (n_tasks - 1) // 2
    gamma_ti = sum(1 for f in conflicting.values() if f > 0) / n_pairs
    ratios = [conflicting.get(k, 0) / c for k, c in comparable.items() if c > 0]
    gamma_at = sum(ratios) / len(ratios) if ratios else 0.0
    return (gamma_ao, gamma_oc, gamma_ti, gamma_at, gamma_te)


def _merge_intervals(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if not intervals:
        return []
    intervals.sort()
    merged = [list(intervals[0])]
    for s, e in intervals[1:]:
        if s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def _activity_by_satellite(instance: Instance) -> dict[str, dict[str, list[tuple[float, float]]]]:
    """satellite -> task -> merged activity intervals of its opportunities."""
    raw: dict[str, dict[str, list[tuple[float, float]]]] = {}
    for opp in instance.opportunities:
        raw.setdefault(opp.satellite_id, {}).setdefault(opp.task_id, []).append(
            (opp.start_s, opp.end_s))
    return {
        sat: {task: _merge_intervals(ivals) for task, ivals in per_task.items()}
        for sat, per_task in raw.items()
    }


def _contention_ratio(activity: Mapping[str, Mapping[str, list[tuple[float, float]]]]
                      ) -> float:
    """Continuous-time pairwise overlap normalised by active timeline load."""
    num = 0.0
    den = 0.0
    for per_task in activity.values():
        events: list[tuple[float, int]] = []
        for ivals in per_task.values():
            for s, e in ivals:
                events.append((s, 1))
                events.append((e, -1))
        events.sort()
        n = 0
        prev_t = None
        for t, delta in events:
            if prev_t is not None and n > 0 and t > prev_t:
                dt = t - prev_t
                num += n * (n - 1) / 2 * dt
                den += n * dt
            n += delta
            prev_t = t
    return num / den if den > 0 else 0.0


def satellite_descriptors(instance: Instance, step_s: float
                          ) -> tuple[float, float, float, float, float]:
    """(lambda_oc, lambda_cs, lambda_to, lambda_ac, lambda_ed)."""
    if step_s <= 0:
        raise ValueError("step_s must be positive")
    n_sats = len(instance.satellites)
    horizon = instance.horizon_s
    if n_sats == 0 or horizon <= 0:
        return (0.0, 0.0, 0.0, 0.0, 0.0)

    activity = _activity_by_satellite(instance)
    lam_oc = _contention_ratio(activity)

    n_steps = max(1, math.ceil(horizon / step_s - 1e-9))
    step_durations = np.full(n_steps, step_s)
    step_durations[-1] = horizon - (n_steps - 1) * step_s

    conflict_sats = 0
    seg_durations: list[float] = []
    seg_depths: list[int] = []
    step_depth_sum = 0.0
    step_weight_sum = 0.0

    for sat in instance.satellites:
        per_task = activity.get(sat.id, {})
        diff = np.zeros(n_steps + 1, dtype=np.int64)
        for ivals in per_task.values():
            for s, e in ivals:
                if e - s <= 0:
                    continue
                k0 = int(math.floor(s / step_s + 1e-9))
                k1 = int(math.ceil(e / step_s - 1e-9)) - 1
                k0 = min(max(k0, 0), n_steps - 1)
                k1 = min(max(k1, k0), n_steps - 1)
                diff[k0] += 1
                diff[k1 + 1] -= 1
        q = np.cumsum(diff[:-1])
        conflict = q >= 2
        if not conflict.any():
            continue
        conflict_sats += 1
        step_depth_sum += float(np.sum(q[conflict] * step_durations[conflict]))
        step_weight_sum += float(np.sum(step_durations[conflict]))
        edges = np.diff(np.concatenate(([False], conflict, [False])).astype(np.int8))
        starts = np.flatnonzero(edges == 1)
        ends = np.flatnonzero(edges == -1) - 1
        for k0, k1 in zip(starts, ends):
            seg_start = k0 * step_s
            seg_end = min(horizon, (k1 + 1) * step_s)
            seg_durations.append(seg_end - seg_start)
            seg_depths.append(int(q[k0:k1 + 1].max()))

    lam_cs = conflict_sats / n_sats
    total_conflict = sum(seg_durations)
    lam_to = total_conflict / (n_sats * horizon)
    lam_ac = step_depth_sum / step_weight_sum if step_weight_sum > 0 else 0.0
    if seg_durations:
        q_max = max(seg_depths)
        excess = sum(max(q - 1, 0) * d for q, d in zip(seg_depths, seg_durations))
        lam_ed = excess / ((q_max - 1) * total_conflict) if q_max > 1 else 0.0
    else:
        lam_ed = 0.0
    return (lam_oc, lam_cs, lam_to, lam_ac, lam_ed)


def characterise(instance: Instance, step_s: Optional[float] = None) -> DescriptorReport:
    step = default_analysis_step(instance) if step_s is None else step_s
    g = task_descriptors(instance)
    lam = satellite_descriptors(instance, step)
    return DescriptorReport(*g, *lam, analysis_step_s=step,
                            level=LEVEL_INSTANCE,
                            degenerate=len(instance.tasks) < 2)


def aggregate(reports: Sequence[DescriptorReport]) -> DescriptorReport:
    """Scenario-level report: arithmetic mean per field over instance reports."""
    if not reports:
        raise ValueError("cannot aggregate an empty report list")
    steps = {r.analysis_step_s for r in reports}
    if len(steps) != 1:
        raise ValueError(f"reports mix analysis steps: {sorted(steps)}")
    means = {f: sum(getattr(r, f) for r in reports) / len(reports) for f in _FIELDS}
    return DescriptorReport(**means, analysis_step_s=reports[0].analysis_step_s,
                            level=LEVEL_SCENARIO,
                            degenerate=any(r.degenerate for r in reports))


_SYNTHETIC_ELEMENTS = OrbitalElements(
    semi_major_axis_km=7000.0, eccentricity=0.0, inclination_deg=98.0,
    raan_deg=0.0, arg_perigee_deg=0.0, true_anomaly_deg=0.0)


def build_synthetic_instance(windows: Iterable[tuple[str, str, float, float]],
                             durations: Mapping[str, int],
                             transition_const: float,
                             horizon_s: float,
                             satellites: Iterable[str] = (),
                             profits: Optional[Mapping[str, int]] = None,
                             slot_step_s: float = 1.0,
                             energy_per_orbit: float = 200.0,
                             storage_per_orbit: float = 2400.0,
                             instance_id: str = "synthetic") -> Instance:
    """Build an instance directly from injected windows, bypassing geometry.

    ``windows`` rows are ``(task_id, satellite_id, start_s, end_s)``; every key
    of ``durations`` becomes a task even when it has no window.  All pairwise
    minimum separations use ``transition_const``.
    """
    window_rows = sorted(windows, key=lambda w: (w[0], w[1], w[2]))
    sat_ids = sorted({w[1] for w in window_rows} | set(satellites))
    task_ids = sorted(durations)
    for task_id, _, start, end in window_rows:
        if task_id not in durations:
            raise ValueError(f"window references unknown task '{task_id}'")
        if not 0 <= start < end <= horizon_s:
            raise ValueError(f"window [{start}, {end}] outside horizon {horizon_s}")

    caps = ResourceCapacities(energy_per_orbit, storage_per_orbit)
    sats = tuple(
        SatelliteSpec(sat_id, _SYNTHETIC_ELEMENTS, AttitudeEnvelope.non_agile(),
                      capacities=caps)
        for sat_id in sat_ids
    )
    tasks = tuple(
        TaskSpec(task_id, lat_deg=0.0, lon_deg=float(i % 360 - 179),
                 priority=1, profit=int(profits[task_id]) if profits else 1,
                 duration_s=int(durations[task_id]))
        for i, task_id in enumerate(task_ids)
    )
    vis = tuple(
        VisibleWindow(task_id, sat_id, float(start), float(end), fixed_roll_deg=0.0)
        for task_id, sat_id, start, end in window_rows
    )
    opps: list[AvailableOpportunity] = []
    for idx, win in enumerate(vis):
        opps.extend(derive_opportunities(win, durations[win.task_id],
                                         slot_step_s, window_index=idx))
    return Instance(
        id=instance_id, horizon_s=float(horizon_s), platform=Platform.NON_AGILE,
        satellites=sats, tasks=tasks, visible_windows=vis,
        opportunities=tuple(opps),
        provenance=Provenance(scenario_id="synthetic", seed=0),
        transition_override_s=float(transition_const),
    )

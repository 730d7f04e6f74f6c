"""Incremental plan state shared by all solvers.

Tracks the per-satellite timelines and per-segment resource ledgers of a
partial plan so that insertion feasibility is checked against the same
conditions the schedule validator enforces (all-pairs compatibility, task
uniqueness, per-segment budgets).
"""

from __future__ import annotations

import bisect
import math
from typing import Optional

from .. import kinematics, metrics
from ..astro import orbital_period_s
from ..core import Assignment, Instance, Platform, Schedule, sort_assignments
from ..feasibility import candidate_assignments

NADIR = (0.0, 0.0, 0.0)


class PlanState:
    """A mutable feasible plan over the instance's candidate assignments."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.candidates = candidate_assignments(instance)
        tasks = instance.task_map()
        sats = instance.satellite_map()

        self.cand_sat: list[str] = []
        self.cand_task: list[str] = []
        self.cand_interval: list[tuple[float, float]] = []
        self.cand_att: list[tuple[tuple[float, float, float], tuple[float, float, float]]] = []
        self.cand_profit: list[int] = []
        for cand in self.candidates:
            opp = instance.opportunities[cand.opportunity_index]
            win = instance.visible_windows[opp.window_index]
            self.cand_sat.append(cand.satellite_id)
            self.cand_task.append(cand.task_id)
            self.cand_interval.append((opp.start_s, opp.end_s))
            self.cand_att.append((kinematics.window_attitude(win, opp.start_s),
                                  kinematics.window_attitude(win, opp.end_s)))
            self.cand_profit.append(tasks[cand.task_id].profit)

        # candidate indices per task in the canonical (start, satellite) order
        self.by_task: dict[str, list[int]] = {t.id: [] for t in instance.tasks}
        for i in sorted(range(len(self.candidates)),
                        key=lambda i: (self.cand_interval[i][0], self.cand_sat[i])):
            self.by_task[self.cand_task[i]].append(i)

        self._profiles = {s.id: kinematics.AgilityProfile.builtin(s.agility_profile)
                          for s in instance.satellites}
        self._caps = {s.id: s.capacities for s in instance.satellites}
        self._rates = {s.id: s.rates for s in instance.satellites}
        self._period = {s.id: orbital_period_s(s.elements.semi_major_axis_km)
                        for s in instance.satellites}
        self._n_seg = {sid: max(1, math.ceil(instance.horizon_s / p))
                       for sid, p in self._period.items()}
        self._sep_cache: dict[tuple[int, int], float] = {}

        self.assigned: dict[str, int] = {}
        self.timeline: dict[str, list[int]] = {s.id: [] for s in instance.satellites}
        self.energy: dict[str, list[float]] = {s.id: [0.0] * self._n_seg[s.id]
                                               for s in instance.satellites}
        self.memory: dict[str, list[float]] = {s.id: [0.0] * self._n_seg[s.id]
                                               for s in instance.satellites}

    def copy(self) -> "PlanState":
        clone = object.__new__(PlanState)
        clone.__dict__.update(self.__dict__)
        clone.assigned = dict(self.assigned)
        clone.timeline = {k: list(v) for k, v in self.timeline.items()}
        clone.energy = {k: list(v) for k, v in self.energy.items()}
        clone.memory = {k: list(v) for k, v in self.memory.items()}
        return clone

    # -- geometry helpers ---------------------------------------------------

    def _segment(self, sat_id: str, t_s: float) -> int:
        return min(int(t_s // self._period[sat_id]), self._n_seg[sat_id] - 1)

    def _min_sep(self, earlier: int, later: int) -> float:
        """Required gap between candidate ``earlier`` and candidate ``later``."""
        key = (earlier, later)
        cached = self._sep_cache.get(key)
        if cached is not None:
            return cached
        if self.instance.transition_override_s is not None:
            sep = self.instance.transition_override_s
        elif self.instance.platform is Platform.NON_AGILE:
            sep = kinematics.NON_AGILE_TRANSITION_S
        else:
            profile = self._profiles[self.cand_sat[earlier]]
            dg = kinematics.delta_g(self.cand_att[earlier][1], self.cand_att[later][0])
            sep = kinematics.transition_time(dg, profile)
        self._sep_cache[key] = sep
        return sep

    def _compatible_on_sat(self, i: int, j: int) -> bool:
        si, ei = self.cand_interval[i]
        sj, ej = self.cand_interval[j]
        if si <= sj:
            gap = sj - ei
            earlier, later = i, j
        else:
            gap = si - ej
            earlier, later = j, i
        if gap <= 1e-12:
            return False
        return gap >= self._min_sep(earlier, later)

    def _neighbours(self, cand: int) -> tuple[Optional[int], Optional[int], int]:
        """(previous, next, insert position) on the candidate's timeline."""
        sat = self.cand_sat[cand]
        line = self.timeline[sat]
        starts = [self.cand_interval[k][0] for k in line]
        pos = bisect.bisect_left(starts, self.cand_interval[cand][0])
        prev = line[pos - 1] if pos > 0 else None
        nxt = line[pos] if pos < len(line) else None
        return prev, nxt, pos

    def _slew_in(self, prev: Optional[int], cand: int) -> float:
        prev_att = NADIR if prev is None else self.cand_att[prev][1]
        return kinematics.delta_g(prev_att, self.cand_att[cand][0])

    def _deltas(self, cand: int) -> tuple[int, float, float, Optional[int], float]:
        """(segment, energy delta, memory delta, next segment, next energy delta)."""
        sat = self.cand_sat[cand]
        rates = self._rates[sat]
        prev, nxt, _ = self._neighbours(cand)
        start, end = self.cand_interval[cand]
        duration = end - start
        seg = self._segment(sat, start)
        d_energy = duration * rates.obs_energy_rate + self._slew_in(prev, cand) * rates.slew_energy_rate
        d_memory = duration * rates.obs_memory_rate
        if nxt is None:
            return seg, d_energy, d_memory, None, 0.0
        seg_next = self._segment(sat, self.cand_interval[nxt][0])
        old_slew = self._slew_in(prev, nxt)
        new_slew = self._slew_in(cand, nxt)
        return seg, d_energy, d_memory, seg_next, (new_slew - old_slew) * rates.slew_energy_rate

    # -- mutation -----------------------------------------------------------

    def can_insert(self, cand: int) -> bool:
        task = self.cand_task[cand]
        if task in self.assigned:
            return False
        sat = self.cand_sat[cand]
        for other in self.timeline[sat]:
            if not self._compatible_on_sat(cand, other):
                return False
        caps = self._caps[sat]
        seg, d_e, d_m, seg_next, d_e_next = self._deltas(cand)
        energy = self.energy[sat]
        new_e = energy[seg] + d_e
        if seg_next is not None:
            if seg_next == seg:
                new_e += d_e_next
            elif energy[seg_next] + d_e_next > caps.energy_per_orbit + 1e-9:
                return False
        if new_e > caps.energy_per_orbit + 1e-9:
            return False
        if self.memory[sat][seg] + d_m > caps.storage_per_orbit + 1e-9:
            return False
        return True

    def insert(self, cand: int) -> None:
        sat = self.cand_sat[cand]
        seg, d_e, d_m, seg_next, d_e_next = self._deltas(cand)
        _, _, pos = self._neighbours(cand)
        self.timeline[sat].insert(pos, cand)
        self.assigned[self.cand_task[cand]] = cand
        self.energy[sat][seg] += d_e
        self.memory[sat][seg] += d_m
        if seg_next is not None:
            self.energy[sat][seg_next] += d_e_next

    def remove(self, task_id: str) -> int:
        cand = self.assigned.pop(task_id)
        sat = self.cand_sat[cand]
        line = self.timeline[sat]
        pos = line.index(cand)
        prev = line[pos - 1] if pos > 0 else None
        nxt = line[pos + 1] if pos + 1 < len(line) else None
        rates = self._rates[sat]
        start, end = self.cand_interval[cand]
        seg = self._segment(sat, start)
        self.energy[sat][seg] -= (end - start) * rates.obs_energy_rate
        self.energy[sat][seg] -= self._slew_in(prev, cand) * rates.slew_energy_rate
        self.memory[sat][seg] -= (end - start) * rates.obs_memory_rate
        if nxt is not None:
            seg_next = self._segment(sat, self.cand_interval[nxt][0])
            old_slew = self._slew_in(cand, nxt)
            new_slew = self._slew_in(prev, nxt)
            self.energy[sat][seg_next] += (new_slew - old_slew) * rates.slew_energy_rate
        del line[pos]
        return cand

    def try_insert(self, cand: int) -> bool:
        if self.can_insert(cand):
            self.insert(cand)
            return True
        return False

    # -- objectives ----------------------------------------------------------

    def assignments(self) -> list[Assignment]:
        return [self.candidates[i] for i in self.assigned.values()]

    def objective(self, kind: str) -> float:
        if kind == "tp":
            return float(sum(self.cand_profit[i] for i in self.assigned.values()))
        if kind == "tcr":
            n = len(self.instance.tasks)
            return len(self.assigned) / n if n else 0.0
        if kind == "all":
            return metrics.composite_of_assignments(self.assignments(), self.instance)
        if kind == "tm":
            tm = metrics.raw_metrics(self.assignments(), self.instance)[3]
            return -tm  # larger is better for every objective
        if kind == "bd":
            bd = metrics.raw_metrics(self.assignments(), self.instance)[2]
            return -1.0 if bd is None else bd
        raise ValueError(f"unknown objective '{kind}'")

    def to_schedule(self, solver_tag: str, wall_time_s: float = 0.0,
                    notes: tuple[str, ...] = ()) -> Schedule:
        return Schedule(
            instance_id=self.instance.id,
            assignments=sort_assignments(self.assignments()),
            solver=solver_tag,
            wall_time_s=wall_time_s,
            notes=notes,
        )

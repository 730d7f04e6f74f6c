"""Simulated annealing over complete plans.

Starts from a greedy profit plan; neighbourhood moves relocate a task to
another of its opportunities, swap the construction order of two tasks on
one satellite, or remove a few tasks and greedily refill.  Worsening moves
pass a Metropolis test under a geometrically cooled temperature; the best
feasible plan ever seen is returned.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from ..core import Instance, Schedule
from .greedy import greedy
from .support import PlanState


@dataclass(frozen=True)
class AnnealingParams:
    t0_profit_factor: float = 10.0   # T0 = factor * mean task profit
    cooling: float = 0.95
    iters_per_temp: int = 200
    t_min_ratio: float = 1e-3
    max_remove: int = 3


def _relocate(state: PlanState, rng: random.Random) -> bool:
    if not state.assigned:
        return False
    task_id = rng.choice(sorted(state.assigned))
    current = state.assigned[task_id]
    options = [c for c in state.by_task[task_id] if c != current]
    if not options:
        return False
    target = rng.choice(options)
    state.remove(task_id)
    if state.try_insert(target):
        return True
    state.insert(current)  # removal relaxed the plan, so this always fits
    return False


def _swap(state: PlanState, rng: random.Random) -> bool:
    by_sat: dict[str, list[str]] = {}
    for task_id, cand in state.assigned.items():
        by_sat.setdefault(state.cand_sat[cand], []).append(task_id)
    pools = sorted(s for s, tasks in by_sat.items() if len(tasks) >= 2)
    if not pools:
        return False
    sat = rng.choice(pools)
    t_a, t_b = rng.sample(sorted(by_sat[sat]), 2)
    old_a, old_b = state.assigned[t_a], state.assigned[t_b]
    state.remove(t_a)
    state.remove(t_b)
    # reinsert in swapped order; roll back to the original slots on failure
    moved = (_reinsert_anywhere(state, t_b, rng)
             and _reinsert_anywhere(state, t_a, rng))
    if not moved:
        for t in (t_a, t_b):
            if t in state.assigned:
                state.remove(t)
        state.insert(old_a)
        state.insert(old_b)
    return moved


def _reinsert_anywhere(state: PlanState, task_id: str, rng: random.Random) -> bool:
    options = list(state.by_task[task_id])
    rng.shuffle(options)
    for cand in options:
        if state.try_insert(cand):
            return True
    return False


def _ruin_and_refill(state: PlanState, rng: random.Random, max_remove: int) -> bool:
    if not state.assigned:
        victims = []
    else:
        n = rng.randint(1, min(max_remove, len(state.assigned)))
        victims = rng.sample(sorted(state.assigned), n)
    for task_id in victims:
        state.remove(task_id)
    todo = [t for t in sorted(state.by_task) if t not in state.assigned]
    rng.shuffle(todo)
    inserted = 0
    for task_id in todo:
        if _reinsert_anywhere(state, task_id, rng):
            inserted += 1
    return bool(victims or inserted)


def simulated_annealing(instance: Instance, objective: str = "tp", seed: int = 0,
                        time_limit_s: float = 60.0,
                        params: AnnealingParams = AnnealingParams()) -> Schedule:
    t_start = time.perf_counter()
    rng = random.Random(seed)

    seed_plan = greedy(instance, "tp", seed=seed, restarts=3)
    state = PlanState(instance)
    for a in seed_plan.assignments:
        state.insert(a.opportunity_index)

    current = state.objective(objective)
    best_assigned = dict(state.assigned)
    best_value = current

    mean_profit = (sum(t.profit for t in instance.tasks) / len(instance.tasks)
                   if instance.tasks else 1.0)
    temp = max(1e-9, params.t0_profit_factor * mean_profit)
    t_min = temp * params.t_min_ratio

    while temp > t_min:
        for _ in range(params.iters_per_temp):
            if time.perf_counter() - t_start > time_limit_s:
                temp = 0.0
                break
            trial = state.copy()
            kind = rng.random()
            if kind < 0.4:
                moved = _relocate(trial, rng)
            elif kind < 0.6:
                moved = _swap(trial, rng)
            else:
                moved = _ruin_and_refill(trial, rng, params.max_remove)
            if not moved:
                continue
            value = trial.objective(objective)
            delta = value - current
            if delta >= 0 or rng.random() < math.exp(delta / max(temp, 1e-12)):
                state = trial
                current = value
                if value > best_value + 1e-12:
                    best_value = value
                    best_assigned = dict(state.assigned)
        temp *= params.cooling

    final = PlanState(instance)
    for cand in sorted(best_assigned.values()):
        final.insert(cand)
    return final.to_schedule(f"sa-{objective}", time.perf_counter() - t_start)

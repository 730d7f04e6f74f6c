"""Constructive greedy baselines: profit, completion, timeliness and balance.

All four insert tasks sequentially under a rule-specific ordering, re-check
feasibility incrementally on every insertion, and keep the best of several
randomised restarts as measured by the rule's own metric.
"""

from __future__ import annotations

import math
import random
import time

from ..core import Instance, Schedule
from .support import PlanState

RULES = ("tp", "tcr", "tm", "bd")


def _earliest_feasible(state: PlanState, task_id: str) -> bool:
    for cand in state.by_task[task_id]:
        if state.try_insert(cand):
            return True
    return False


def _construct_ordered(state: PlanState, order: list[str]) -> None:
    for task_id in order:
        _earliest_feasible(state, task_id)


def _imbalance(counts: dict[str, int]) -> float:
    """Coefficient of variation of loads over the whole fleet (zeros count,
    so concentrating work on few satellites scores worse than spreading it)."""
    values = list(counts.values())
    if len(values) <= 1:
        return 0.0
    mean = sum(values) / len(values)
    if mean == 0:
        return 0.0
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return math.sqrt(var) / mean


def _construct_balanced(state: PlanState) -> None:
    counts = {s.id: 0 for s in state.instance.satellites}
    unassigned = sorted(state.by_task)
    while True:
        best = None  # (imbalance, start, task, sat, cand)
        for task_id in unassigned:
            seen_sats: set[str] = set()
            for cand in state.by_task[task_id]:
                sat = state.cand_sat[cand]
                if sat in seen_sats:
                    continue  # earliest insertable slot per satellite suffices
                if not state.can_insert(cand):
                    continue
                seen_sats.add(sat)
                counts[sat] += 1
                score = (_imbalance(counts), state.cand_interval[cand][0],
                         task_id, sat, cand)
                counts[sat] -= 1
                if best is None or score < best:
                    best = score
        if best is None:
            return
        _, _, task_id, sat, cand = best
        state.insert(cand)
        counts[sat] += 1
        unassigned.remove(task_id)


def greedy(instance: Instance, rule: str, seed: int = 0,
           restarts: int = 10) -> Schedule:
    """Best-of-restarts sequential insertion under the named rule."""
    if rule not in RULES:
        raise ValueError(f"unknown greedy rule '{rule}'; expected one of {RULES}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    t0 = time.perf_counter()
    rng = random.Random(seed)

    opp_counts = {task_id: 0 for task_id in (t.id for t in instance.tasks)}
    for opp in instance.opportunities:
        opp_counts[opp.task_id] += 1

    best_state = None
    best_score = -math.inf
    for _ in range(restarts):
        state = PlanState(instance)
        task_ids = sorted(state.by_task)
        jitter = {t: rng.random() for t in task_ids}
        if rule == "tp":
            order = sorted(task_ids, key=lambda t: jitter[t])
            _construct_ordered(state, order)
        elif rule == "tcr":
            order = sorted(task_ids, key=lambda t: (opp_counts[t], jitter[t]))
            _construct_ordered(state, order)
        elif rule == "tm":
            first_start = {
                t: (state.cand_interval[state.by_task[t][0]][0]
                    if state.by_task[t] else math.inf)
                for t in task_ids
            }
            order = sorted(task_ids, key=lambda t: (first_start[t], jitter[t]))
            _construct_ordered(state, order)
        else:
            _construct_balanced(state)
        score = state.objective(rule)
        if score > best_score + 1e-12:
            best_score = score
            best_state = state
        if rule == "bd":
            break  # deterministic construction; restarts add nothing
    assert best_state is not None
    return best_state.to_schedule(f"greedy-{rule}", time.perf_counter() - t0)

"""Ant colony optimisation over (task, opportunity) choices.

Each ant builds a plan by repeatedly sampling an insertable candidate with
probability proportional to pheromone^beta1 * heuristic^beta2, where the
heuristic blends task profit with how early the slot sits in the horizon.
The iteration best and the global best deposit pheromone; evaporation keeps
the trail from saturating.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from ..core import Instance, Schedule
from .support import PlanState


@dataclass(frozen=True)
class ColonyParams:
    ants: int = 20
    iterations: int = 100
    evaporation: float = 0.1
    beta_pheromone: float = 1.0
    beta_heuristic: float = 2.0
    deposit: float = 1.0


def _heuristic(state: PlanState, cand: int) -> float:
    start = state.cand_interval[cand][0]
    horizon = state.instance.horizon_s
    earliness = (horizon - start) / horizon if horizon > 0 else 0.0
    return 0.1 + state.cand_profit[cand] / 10.0 + earliness


def _construct(state: PlanState, pheromone: list[float],
               params: ColonyParams, rng: random.Random) -> PlanState:
    plan = state.copy()
    pool = [c for t in sorted(plan.by_task) for c in plan.by_task[t]]
    weights = [
        (pheromone[c] ** params.beta_pheromone)
        * (_heuristic(plan, c) ** params.beta_heuristic)
        for c in pool
    ]
    while pool:
        total = sum(weights)
        if total <= 0:
            break
        r = rng.random() * total
        acc = 0.0
        pick = len(pool) - 1
        for idx, w in enumerate(weights):
            acc += w
            if r <= acc:
                pick = idx
                break
        cand = pool[pick]
        if plan.try_insert(cand):
            task = plan.cand_task[cand]
            keep = [k for k, c in enumerate(pool) if plan.cand_task[c] != task]
            pool = [pool[k] for k in keep]
            weights = [weights[k] for k in keep]
        else:
            del pool[pick]
            del weights[pick]
    return plan


def ant_colony(instance: Instance, objective: str = "tp", seed: int = 0,
               time_limit_s: float = 60.0,
               params: ColonyParams = ColonyParams()) -> Schedule:
    if params.ants < 1:
        raise ValueError("ants must be >= 1")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    base = PlanState(instance)
    pheromone = [1.0] * len(base.candidates)

    best_state = base.copy()
    best_value = best_state.objective(objective)

    for _ in range(params.iterations):
        if time.perf_counter() - t0 > time_limit_s:
            break
        iter_best = None
        iter_value = -float("inf")
        for _ant in range(params.ants):
            plan = _construct(base, pheromone, params, rng)
            value = plan.objective(objective)
            if value > iter_value:
                iter_value = value
                iter_best = plan
        if iter_best is not None and iter_value > best_value + 1e-12:
            best_value = iter_value
            best_state = iter_best
        for c in range(len(pheromone)):
            pheromone[c] *= (1.0 - params.evaporation)
        for plan, value in ((iter_best, iter_value), (best_state, best_value)):
            if plan is None:
                continue
            for cand in plan.assigned.values():
                pheromone[cand] += params.deposit * max(value, 0.0)

    return best_state.to_schedule(f"aco-{objective}", time.perf_counter() - t0)

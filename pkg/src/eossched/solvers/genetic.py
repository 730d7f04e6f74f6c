"""Genetic algorithm on task-indexed assignment vectors.

A chromosome holds one candidate index (or -1) per task; decoding walks the
tasks in order and inserts whatever still fits, which doubles as the repair
step after crossover and mutation.  Tournament selection, one-point
crossover, relocate/remove mutation, elitism on the incumbent.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from ..core import Instance, Schedule
from .greedy import greedy
from .support import PlanState


@dataclass(frozen=True)
class GeneticParams:
    population: int = 50
    generations: int = 200
    mutation_rate: float = 0.1
    tournament: int = 3
    elite: int = 1


def _decode(instance_state: PlanState, genome: list[int]) -> PlanState:
    """Repairing decode: infeasible genes are dropped in task order."""
    state = instance_state.copy()
    for task_idx, cand in enumerate(genome):
        if cand < 0:
            continue
        state.try_insert(cand)
    return state


def _encode(state: PlanState, task_ids: list[str]) -> list[int]:
    return [state.assigned.get(t, -1) for t in task_ids]


def genetic_algorithm(instance: Instance, objective: str = "tp", seed: int = 0,
                      time_limit_s: float = 60.0,
                      params: GeneticParams = GeneticParams()) -> Schedule:
    if params.population < 2:
        raise ValueError("population must be >= 2")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    base = PlanState(instance)
    task_ids = sorted(base.by_task)

    def random_genome() -> list[int]:
        return [rng.choice(base.by_task[t]) if base.by_task[t] and rng.random() < 0.7
                else -1 for t in task_ids]

    seed_plan = greedy(instance, "tp", seed=seed, restarts=3)
    seeded = base.copy()
    for a in seed_plan.assignments:
        seeded.insert(a.opportunity_index)
    population = [_encode(seeded, task_ids)]
    while len(population) < params.population:
        population.append(random_genome())

    def fitness(genome: list[int]) -> tuple[float, PlanState]:
        state = _decode(base, genome)
        return state.objective(objective), state

    scored = [fitness(g) for g in population]
    best_value, best_state = max(scored, key=lambda x: x[0])

    def tournament() -> list[int]:
        picks = [rng.randrange(len(population)) for _ in range(params.tournament)]
        winner = max(picks, key=lambda i: scored[i][0])
        return population[winner]

    for _ in range(params.generations):
        if time.perf_counter() - t0 > time_limit_s:
            break
        next_pop = [_encode(best_state, task_ids)][:params.elite]
        while len(next_pop) < params.population:
            a, b = tournament(), tournament()
            point = rng.randrange(1, len(task_ids)) if len(task_ids) > 1 else 0
            child = a[:point] + b[point:]
            for k, task_id in enumerate(task_ids):
                if rng.random() < params.mutation_rate:
                    options = base.by_task[task_id]
                    child[k] = rng.choice(options) if options and rng.random() < 0.8 else -1
            next_pop.append(child)
        population = next_pop
        scored = [fitness(g) for g in population]
        gen_value, gen_state = max(scored, key=lambda x: x[0])
        if gen_value > best_value + 1e-12:
            best_value, best_state = gen_value, gen_state

    return best_state.to_schedule(f"ga-{objective}", time.perf_counter() - t0)

"""Baseline schedulers behind one interface: instance in, feasible plan out.

Eight solvers: exact branch and bound, four greedy rules, simulated
annealing, a genetic algorithm and ant colony optimisation.  The exact and
meta-heuristic families take a tp / tcr / all objective; greedy variants
imply their own.  A (instance, config) pair fully determines the output.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Any

from ..core import Instance, Schedule
from .annealing import AnnealingParams, simulated_annealing
from .colony import ColonyParams, ant_colony
from .exact import exact_branch_and_bound
from .genetic import GeneticParams, genetic_algorithm
from .greedy import greedy

SOLVER_NAMES = ("exact", "greedy_tp", "greedy_tcr", "greedy_tm", "greedy_bd",
                "sa", "ga", "aco")
OBJECTIVES = ("tp", "tcr", "all")


@dataclass(frozen=True)
class SolverConfig:
    solver: str
    objective: str = "tp"
    seed: int = 0
    time_limit_s: float = 60.0
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.solver not in SOLVER_NAMES:
            raise ValueError(f"unknown solver '{self.solver}'; expected one of {SOLVER_NAMES}")
        if not self.solver.startswith("greedy") and self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective '{self.objective}'")
        if self.time_limit_s <= 0:
            raise ValueError("time_limit_s must be positive")

    @property
    def tag(self) -> str:
        if self.solver.startswith("greedy"):
            return f"greedy-{self.solver.split('_', 1)[1]}"
        return f"{self.solver}-{self.objective}"

    def as_dict(self) -> dict[str, Any]:
        return {"solver": self.solver, "objective": self.objective,
                "seed": self.seed, "time_limit_s": self.time_limit_s,
                "params": dict(sorted(self.params.items()))}


def _with_overrides(defaults, overrides: dict[str, Any]):
    known = {f.name for f in dataclasses.fields(defaults)}
    bad = set(overrides) - known
    if bad:
        raise ValueError(f"unknown parameters {sorted(bad)} for {type(defaults).__name__}")
    return dataclasses.replace(defaults, **overrides)


def solve(instance: Instance, config: SolverConfig) -> Schedule:
    """Run the configured solver; the result always passes the validator."""
    t0 = time.perf_counter()
    if config.solver == "exact":
        schedule = exact_branch_and_bound(instance, config.objective,
                                          config.time_limit_s)
    elif config.solver.startswith("greedy"):
        rule = config.solver.split("_", 1)[1]
        restarts = int(config.params.get("restarts", 10))
        schedule = greedy(instance, rule, seed=config.seed, restarts=restarts)
    elif config.solver == "sa":
        params = _with_overrides(AnnealingParams(), config.params)
        schedule = simulated_annealing(instance, config.objective, config.seed,
                                       config.time_limit_s, params)
    elif config.solver == "ga":
        params = _with_overrides(GeneticParams(), config.params)
        schedule = genetic_algorithm(instance, config.objective, config.seed,
                                     config.time_limit_s, params)
    elif config.solver == "aco":
        params = _with_overrides(ColonyParams(), config.params)
        schedule = ant_colony(instance, config.objective, config.seed,
                              config.time_limit_s, params)
    else:  # pragma: no cover - guarded by __post_init__
        raise ValueError(config.solver)
    wall = time.perf_counter() - t0
    return dataclasses.replace(schedule, solver=config.tag, wall_time_s=wall)


__all__ = [
    "SolverConfig", "solve", "SOLVER_NAMES", "OBJECTIVES",
    "exact_branch_and_bound", "greedy", "simulated_annealing",
    "genetic_algorithm", "ant_colony",
    "AnnealingParams", "GeneticParams", "ColonyParams",
]

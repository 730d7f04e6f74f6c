"""Five-metric evaluation protocol plus the equal-weight composite.

Schedules are scored on total profit, task completion rate, workload balance
across satellites, timeliness of execution and wall-clock runtime.  The
composite used by the -ALL solver variants averages the first four after
normalising profit by the total available profit and flipping timeliness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import Assignment, Instance, Schedule
from .feasibility import validate_schedule


class InfeasibleScheduleError(ValueError):
    """Evaluation refuses schedules that fail the feasibility validator."""


@dataclass(frozen=True)
class MetricReport:
    tp: float
    tcr: float
    bd: Optional[float]   # None when no task executed (undefined)
    tm: float
    rt_s: float
    composite_all: float

    @property
    def bd_defined(self) -> bool:
        return self.bd is not None


def _balance_degree(assignments: Iterable[Assignment]) -> Optional[float]:
    """1 - (sample std / mean) of per-satellite executed-task counts,
    over satellites that execute at least one task."""
    counts: dict[str, int] = {}
    for a in assignments:
        counts[a.satellite_id] = counts.get(a.satellite_id, 0) + 1
    values = list(counts.values())
    if not values:
        return None
    if len(values) == 1:
        return 1.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return 1.0 - math.sqrt(var) / mean


def raw_metrics(assignments: Iterable[Assignment], instance: Instance
                ) -> tuple[float, float, Optional[float], float]:
    """(tp, tcr, bd, tm) straight from the definitions; no feasibility check."""
    assigns = list(assignments)
    tasks = instance.task_map()
    n_tasks = len(instance.tasks)
    horizon = instance.horizon_s

    tp = float(sum(tasks[a.task_id].profit for a in assigns))
    if n_tasks == 0:
        return (tp, 0.0, _balance_degree(assigns), 0.0)
    tcr = len(assigns) / n_tasks
    # completed tasks contribute their normalised start time, missed tasks
    # the full horizon
    done_time = sum(a.start_s for a in assigns)
    missed = n_tasks - len(assigns)
    tm = (done_time + missed * horizon) / (horizon * n_tasks)
    return (tp, tcr, _balance_degree(assigns), tm)


def composite_from_parts(tp: float, tcr: float, bd: Optional[float], tm: float,
                         total_profit: float) -> float:
    """Equal-weight mean of normalised profit, completion, balance and
    flipped timeliness; undefined balance counts as 0 and balance is clamped
    to [0, 1] inside the composite only."""
    tp_norm = tp / total_profit if total_profit > 0 else 0.0
    bd_term = 0.0 if bd is None else min(1.0, max(0.0, bd))
    return (tp_norm + tcr + bd_term + (1.0 - tm)) / 4.0


def composite_of_assignments(assignments: Iterable[Assignment],
                             instance: Instance) -> float:
    """Composite objective for a candidate plan (used by -ALL solvers)."""
    tp, tcr, bd, tm = raw_metrics(assignments, instance)
    total_profit = float(sum(t.profit for t in instance.tasks))
    return composite_from_parts(tp, tcr, bd, tm, total_profit)


def evaluate(schedule: Schedule, instance: Instance, wall_time_s: float
             ) -> MetricReport:
    """Score a schedule that passes the feasibility validator."""
    report = validate_schedule(schedule, instance)
    if not report.ok:
        rules = sorted({v.rule for v in report.violations})
        raise InfeasibleScheduleError(
            f"schedule is infeasible ({', '.join(rules)}); validate before evaluating")
    tp, tcr, bd, tm = raw_metrics(schedule.assignments, instance)
    total_profit = float(sum(t.profit for t in instance.tasks))
    return MetricReport(
        tp=tp, tcr=tcr, bd=bd, tm=tm, rt_s=float(wall_time_s),
        composite_all=composite_from_parts(tp, tcr, bd, tm, total_profit),
    )


def composite_score(report: MetricReport, instance: Instance) -> float:
    return report.composite_all

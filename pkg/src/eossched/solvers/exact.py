"""Depth-first branch and bound over candidate assignments.

Binary include/exclude branching on the candidate list with an admissible
bound: current value plus the best remaining per-task contribution.  Exact
when the search finishes inside the time limit; otherwise the best incumbent
is returned and the schedule carries an ``incomplete`` note.
"""

from __future__ import annotations

import time

from ..core import Instance, Schedule
from ..metrics import raw_metrics
from .support import PlanState


def _contribution_bounds(state: PlanState, objective: str) -> dict[str, dict[int, float]]:
    """Optimistic per-candidate contribution to the objective."""
    instance = state.instance
    n_tasks = max(1, len(instance.tasks))
    total_profit = max(1.0, float(sum(t.profit for t in instance.tasks)))
    horizon = instance.horizon_s
    out: dict[str, dict[int, float]] = {}
    for task_id, cands in state.by_task.items():
        per = {}
        for i in cands:
            profit = state.cand_profit[i]
            start = state.cand_interval[i][0]
            if objective == "tp":
                per[i] = float(profit)
            elif objective == "tcr":
                per[i] = 1.0 / n_tasks
            else:  # composite: profit, completion and timeliness terms; the
                # balance term is bounded by 1 globally, handled in the caller
                per[i] = (profit / total_profit + 1.0 / n_tasks
                          + (horizon - start) / (horizon * n_tasks)) / 4.0
        out[task_id] = per
    return out


def exact_branch_and_bound(instance: Instance, objective: str = "tp",
                           time_limit_s: float = 60.0) -> Schedule:
    start_time = time.perf_counter()
    state = PlanState(instance)
    # canonical deterministic branching order
    order = sorted(range(len(state.candidates)),
                   key=lambda i: (state.cand_task[i], state.cand_sat[i],
                                  state.cand_interval[i][0]))
    contrib = _contribution_bounds(state, objective)
    # best remaining contribution per task over the suffix order[k:]
    suffix_best: list[dict[str, float]] = [dict() for _ in range(len(order) + 1)]
    for k in range(len(order) - 1, -1, -1):
        cur = dict(suffix_best[k + 1])
        i = order[k]
        task = state.cand_task[i]
        value = contrib[task][i]
        if value > cur.get(task, 0.0):
            cur[task] = value
        suffix_best[k] = cur

    # the composite's balance term can reach 1 regardless of the partial plan
    slack = 0.25 if objective == "all" else 0.0

    best_assigned: dict[str, int] = {}
    best_value = state.objective(objective)
    incomplete = False
    nodes = 0

    total_profit = max(1.0, float(sum(t.profit for t in instance.tasks)))

    def bound(k: int) -> float:
        remaining = sum(v for task, v in suffix_best[k].items()
                        if task not in state.assigned)
        if objective == "all":
            # current value without the balance term, whose bound is the slack
            tp, tcr, _, tm = raw_metrics(state.assignments(), instance)
            return (tp / total_profit + tcr + (1.0 - tm)) / 4.0 + remaining + slack
        return state.objective(objective) + remaining

    # explicit-stack DFS: include branch explored first, then exclude
    stack: list[tuple[str, object]] = [("visit", 0)]
    while stack:
        op, arg = stack.pop()
        if op == "remove":
            state.remove(arg)  # type: ignore[arg-type]
            continue
        k = arg  # type: ignore[assignment]
        nodes += 1
        if nodes % 4096 == 0 and time.perf_counter() - start_time > time_limit_s:
            incomplete = True
            break
        value = state.objective(objective)
        if value > best_value + 1e-12:
            best_value = value
            best_assigned = dict(state.assigned)
        if k >= len(order):
            continue
        if bound(k) <= best_value + 1e-12:
            continue
        cand = order[k]
        if state.can_insert(cand):
            stack.append(("visit", k + 1))                   # exclude branch
            stack.append(("remove", state.cand_task[cand]))  # undo include
            stack.append(("visit", k + 1))                   # include subtree
            state.insert(cand)
        else:
            stack.append(("visit", k + 1))

    final = PlanState(instance)
    for cand in sorted(best_assigned.values()):
        final.insert(cand)
    wall = time.perf_counter() - start_time
    notes = ("incomplete",) if incomplete else ()
    return final.to_schedule(f"exact-{objective}", wall, notes)

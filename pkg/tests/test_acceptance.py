"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summary lines and timings.
"""

import csv
import math
import random
import time

import numpy as np
import pytest

from eossched import descriptors as desc
from eossched import kinematics as kin
from eossched import metrics as met
from eossched import scenarios as gen
from eossched.campaign import RunManifest, run_campaign
from eossched.core import Schedule, sort_assignments
from eossched.descriptors import build_synthetic_instance
from eossched.feasibility import candidate_assignments, validate_schedule
from eossched.solvers import SolverConfig, solve
from eossched.solvers.exact import exact_branch_and_bound
from conftest import TOY_DURATIONS, TOY_WINDOWS, make_fuzz_instance


def _announce(index, ok, detail):
    print(f"\nACCEPTANCE {index} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _schedule(instance, assignments):
    return Schedule(instance.id, sort_assignments(assignments), solver="acc")


# -- 1: worked-example descriptor oracle ------------------------------------

def test_criterion_1_descriptor_oracle():
    t0 = time.perf_counter()
    inst = build_synthetic_instance(TOY_WINDOWS, TOY_DURATIONS,
                                    transition_const=1.0, horizon_s=10.0)
    report = desc.characterise(inst, step_s=1.0)
    expected = {
        "gamma_ao": 1.5, "gamma_oc": 0.75, "gamma_ti": 2.0 / 6.0,
        "gamma_at": 1.0, "gamma_te": 1.5, "lambda_oc": 3.0 / 13.0,
        "lambda_cs": 1.0, "lambda_to": 3.0 / 20.0, "lambda_ac": 2.0,
        "lambda_ed": 1.0,
    }
    errs = {k: abs(getattr(report, k) - v) for k, v in expected.items()}
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-9 and elapsed < 1.0
    _announce(1, ok, f"all ten descriptors exact (max err {max(errs.values()):.2e}, "
                     f"{elapsed:.3f}s)")


# -- 2: transition-time model -------------------------------------------------

def test_criterion_2_transition_model():
    t0 = time.perf_counter()
    grid = np.arange(0.0, 180.0 + 1e-9, 0.1)
    standard = kin.AgilityProfile.builtin("standard")

    plateau_ok = all(abs(kin.transition_time(float(x), standard) - 11.66) <= 0.01
                     for x in np.arange(0.0, 10.0 + 1e-9, 0.5))
    eps = 1e-7
    jumps = [abs(kin.transition_time(b - eps, standard)
                 - kin.transition_time(b + eps, standard))
             for b in kin.BREAKPOINTS_DEG]
    continuous_ok = max(jumps) <= 1e-6

    values = [kin.transition_time(float(x), standard) for x in grid]
    monotone_ok = all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    profiles = [kin.AgilityProfile.builtin(n)
                for n in ("high", "standard", "low", "limited")]
    dominance_ok = all(
        kin.transition_time(float(x), profiles[i])
        <= kin.transition_time(float(x), profiles[i + 1]) + 1e-12
        for x in grid for i in range(3))
    elapsed = time.perf_counter() - t0
    ok = plateau_ok and continuous_ok and monotone_ok and dominance_ok and elapsed < 1.0
    _announce(2, ok, f"floor/continuity/monotonicity/dominance hold "
                     f"(max jump {max(jumps):.1e}, {elapsed:.3f}s)")


# -- 3: scenario enumeration --------------------------------------------------

def test_criterion_3_enumeration_counts():
    t0 = time.perf_counter()
    std = gen.enumerate_standard()
    spec = gen.enumerate_specific()
    by_family = {}
    for t in spec:
        by_family[t.family] = by_family.get(t.family, 0) + 1
    combos = {(t.sat_count, t.task_count) for t in std}
    slots = (len(std) + len(spec)) * gen.SEEDS_PER_SCENARIO
    elapsed = time.perf_counter() - t0
    ok = (len(std) == 1104 and len(spec) == 286 and slots == 13900
          and len(combos) == 46
          and by_family == {"capacity": 120, "agility": 36,
                            "constellation": 120, "realistic": 10}
          and elapsed < 5.0)
    _announce(3, ok, f"1104 standard + 286 specific = 13900 instance slots "
                     f"({elapsed:.2f}s)")


# -- 4: exact solver vs exhaustive enumeration --------------------------------

def _brute_force_value(instance, objective):
    cands = candidate_assignments(instance)
    best = met.composite_of_assignments([], instance) if objective == "all" else 0.0
    for bits in range(2 ** len(cands)):
        subset = [cands[i] for i in range(len(cands)) if bits >> i & 1]
        if not validate_schedule(_schedule(instance, subset), instance).ok:
            continue
        if objective == "tp":
            value = met.raw_metrics(subset, instance)[0]
        elif objective == "tcr":
            value = met.raw_metrics(subset, instance)[1]
        else:
            value = met.composite_of_assignments(subset, instance)
        best = max(best, value)
    return best


def test_criterion_4_exact_matches_bruteforce():
    t0 = time.perf_counter()
    mismatches = []
    for k in range(50):
        inst = make_fuzz_instance(1000 + k, max_candidates=10)
        for objective in ("tp", "tcr", "all"):
            schedule = exact_branch_and_bound(inst, objective)
            if objective == "tp":
                value = met.raw_metrics(schedule.assignments, inst)[0]
            elif objective == "tcr":
                value = met.raw_metrics(schedule.assignments, inst)[1]
            else:
                value = met.composite_of_assignments(schedule.assignments, inst)
            target = _brute_force_value(inst, objective)
            if abs(value - target) > 1e-9:
                mismatches.append((inst.id, objective, value, target))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 60.0
    _announce(4, ok, f"50 micro-instances x 3 objectives match exhaustive optimum "
                     f"({elapsed:.1f}s)" + (f"; mismatches: {mismatches[:3]}"
                                            if mismatches else ""))


# -- 5: feasibility-by-construction fuzz --------------------------------------

FUZZ_PARAMS = {
    "exact": {}, "greedy_tp": {"restarts": 2}, "greedy_tcr": {"restarts": 2},
    "greedy_tm": {"restarts": 2}, "greedy_bd": {},
    "sa": {"iters_per_temp": 10, "t_min_ratio": 0.2},
    "ga": {"population": 6, "generations": 5},
    "aco": {"ants": 3, "iterations": 4},
}


def test_criterion_5_feasibility_fuzz():
    t0 = time.perf_counter()
    objectives = ("tp", "tcr", "all")
    failures = []
    kept_schedules = []
    for k in range(1000):
        inst = make_fuzz_instance(20_000 + k)
        objective = objectives[k % 3]
        for name, params in FUZZ_PARAMS.items():
            config = SolverConfig(name, objective=objective, seed=k,
                                  time_limit_s=30.0, params=params)
            schedule = solve(inst, config)
            if not validate_schedule(schedule, inst).ok:
                failures.append((inst.id, config.tag))
        kept_schedules.append((inst, schedule))
    solver_time = time.perf_counter() - t0

    rng = random.Random(99)
    closure_failures = 0
    for inst, schedule in kept_schedules:
        for _ in range(10):
            subset = [a for a in schedule.assignments if rng.random() < 0.5]
            if not validate_schedule(_schedule(inst, subset), inst).ok:
                closure_failures += 1
    elapsed = time.perf_counter() - t0
    ok = not failures and closure_failures == 0 and elapsed < 600.0
    _announce(5, ok, f"8000 solver runs feasible, 10000 subsets stay feasible "
                     f"(solve {solver_time:.0f}s, total {elapsed:.0f}s)"
                     + (f"; failures {failures[:3]}" if failures else ""))


# -- 6: metric properties -----------------------------------------------------

def test_criterion_6_metric_properties():
    t0 = time.perf_counter()
    toy = build_synthetic_instance(TOY_WINDOWS, TOY_DURATIONS, 1.0, 10.0)
    empty = met.evaluate(_schedule(toy, []), toy, 0.0)
    empty_ok = (empty.tp, empty.tcr, empty.tm) == (0.0, 0.0, 1.0) and empty.bd is None

    balanced = build_synthetic_instance(
        [("A", "S1", 0.0, 10.0), ("B", "S2", 0.0, 10.0)],
        {"A": 10, "B": 10}, 1.0, 100.0)
    full = met.evaluate(_schedule(balanced, candidate_assignments(balanced)),
                        balanced, 0.0)
    full_ok = (full.tcr, full.tm, full.bd) == (1.0, 0.0, 1.0)

    worst = 0.0
    for k in range(200):
        inst = make_fuzz_instance(40_000 + k)
        cands = candidate_assignments(inst)
        rng = random.Random(k)
        chosen = []
        for c in sorted(cands, key=lambda c: rng.random()):
            trial = chosen + [c]
            if validate_schedule(_schedule(inst, trial), inst).ok:
                chosen = trial
        report = met.evaluate(_schedule(inst, chosen), inst, 0.0)
        # direct-formula oracle
        tasks = {t.id: t for t in inst.tasks}
        n = len(inst.tasks)
        tp = sum(tasks[a.task_id].profit for a in chosen)
        tcr = len(chosen) / n
        tm = (sum(a.start_s for a in chosen)
              + (n - len(chosen)) * inst.horizon_s) / (inst.horizon_s * n)
        counts = {}
        for a in chosen:
            counts[a.satellite_id] = counts.get(a.satellite_id, 0) + 1
        if not counts:
            bd = None
        elif len(counts) == 1:
            bd = 1.0
        else:
            vals = list(counts.values())
            mean = sum(vals) / len(vals)
            bd = 1.0 - math.sqrt(sum((v - mean) ** 2 for v in vals)
                                 / (len(vals) - 1)) / mean
        worst = max(worst, abs(report.tp - tp), abs(report.tcr - tcr),
                    abs(report.tm - tm),
                    0.0 if bd is None and report.bd is None
                    else abs((report.bd or 0.0) - (bd or 0.0)))
    elapsed = time.perf_counter() - t0
    ok = empty_ok and full_ok and worst <= 1e-12
    _announce(6, ok, f"edge cases and 200 randomized schedules match the direct "
                     f"formulas (max err {worst:.1e}, {elapsed:.0f}s)")


# -- 7: structural trends at desk scale ---------------------------------------

def test_criterion_7_structural_trends():
    t0 = time.perf_counter()
    seeds = range(10)
    horizons = ("h012", "h024", "h072")
    means_ao, means_oc = [], []
    lambda_oc_global = None
    for h in horizons:
        template = gen.scenario_by_id(f"std-ag-gr-{h}-s0010-t00100")
        reports = [desc.characterise(
            gen.generate_instance(template, s, slot_step_s=30.0), 1.0)
            for s in seeds]
        means_ao.append(sum(r.gamma_ao for r in reports) / len(reports))
        means_oc.append(sum(r.gamma_oc for r in reports) / len(reports))
        if h == "h024":
            lambda_oc_global = sum(r.lambda_oc for r in reports) / len(reports)
    ao_monotone = means_ao[0] <= means_ao[1] <= means_ao[2]
    oc_monotone = means_oc[0] >= means_oc[1] >= means_oc[2]

    clustered = gen.scenario_by_id("std-ag-rc-h024-s0010-t00100")
    reports = [desc.characterise(
        gen.generate_instance(clustered, s, slot_step_s=30.0), 1.0)
        for s in seeds]
    lambda_oc_clustered = sum(r.lambda_oc for r in reports) / len(reports)
    clustering_ok = lambda_oc_clustered > lambda_oc_global

    elapsed = time.perf_counter() - t0
    ok = ao_monotone and oc_monotone and clustering_ok and elapsed < 1200.0
    _announce(7, ok,
              f"gamma_ao {[round(x, 1) for x in means_ao]} non-decreasing, "
              f"gamma_oc {[round(x, 3) for x in means_oc]} non-increasing, "
              f"lambda_oc clustered {lambda_oc_clustered:.3f} > global "
              f"{lambda_oc_global:.3f} ({elapsed:.0f}s)")


# -- 8: end-to-end campaign determinism ----------------------------------------

def test_criterion_8_campaign_determinism(tmp_path):
    t0 = time.perf_counter()
    manifest = RunManifest(
        scenarios=("std-ag-gr-h012-s0001-t00010", "std-ag-gr-h012-s0003-t00010"),
        seeds=tuple(range(10)),
        solvers=(SolverConfig("greedy_tp", params={"restarts": 3}),
                 SolverConfig("greedy_tm", params={"restarts": 3}),
                 SolverConfig("sa", "all", params={"iters_per_temp": 20,
                                                   "t_min_ratio": 0.1})),
    )
    cache = tmp_path / "cache"
    runs = {}
    for label, jobs in (("a", 1), ("b", 8), ("c", 1)):
        path = run_campaign(manifest, tmp_path / f"out-{label}", jobs=jobs,
                            cache_dir=cache)
        runs[label] = path.read_bytes()
    identical = runs["a"] == runs["b"] == runs["c"]

    # cache-cold rerun: every column except wall-clock runtime must agree
    cold = run_campaign(manifest, tmp_path / "out-cold", jobs=1,
                        cache_dir=tmp_path / "cache2")

    def strip_rt(data):
        rows = list(csv.DictReader(data.splitlines()))
        return [{k: v for k, v in row.items() if k != "rt_s"} for row in rows]

    cold_matches = strip_rt(cold.read_text()) == strip_rt(runs["a"].decode())
    elapsed = time.perf_counter() - t0
    ok = identical and cold_matches and elapsed < 900.0
    _announce(8, ok, f"results tables byte-identical across reruns and jobs 1/8; "
                     f"cache-cold rerun matches on all non-runtime columns "
                     f"({elapsed:.0f}s)")


# -- 9: meta-heuristic quality on micro-instances ------------------------------

def test_criterion_9_metaheuristic_quality():
    t0 = time.perf_counter()
    hits = {"sa": 0, "ga": 0, "aco": 0}
    for k in range(100):
        inst = make_fuzz_instance(60_000 + k, max_candidates=12)
        target = met.raw_metrics(
            exact_branch_and_bound(inst, "tp").assignments, inst)[0]
        for name in hits:
            config = SolverConfig(name, "tp", seed=k, time_limit_s=60.0)
            value = met.raw_metrics(solve(inst, config).assignments, inst)[0]
            if value >= target - 1e-9:
                hits[name] += 1
    elapsed = time.perf_counter() - t0
    ok = hits["sa"] >= 90 and hits["ga"] >= 90 and hits["aco"] >= 85 and elapsed < 600.0
    _announce(9, ok, f"optimum hit rates over 100 runs: sa {hits['sa']}, "
                     f"ga {hits['ga']}, aco {hits['aco']} ({elapsed:.0f}s)")

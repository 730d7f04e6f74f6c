"""Campaign runner: generate, solve, validate, evaluate, aggregate.

A manifest lists (scenario, seed, solver-config) triples.  Completed triples
are cached under a content-digest key, so reruns and resumed runs recompute
nothing and always merge into byte-identical results tables; rows are sorted
deterministically regardless of worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import descriptors as charlib
from .core import (
    Instance,
    ParseError,
    deserialize_instance,
    schedule_payload,
    serialize_instance,
)
from .metrics import evaluate
from .scenarios import SEEDS_PER_SCENARIO, generate_instance, scenario_by_id
from .solvers import SolverConfig, solve

CACHE_ENV = "EOSSCHED_CACHE"
RESULT_COLUMNS = ("level", "scenario", "seed", "instance_id", "solver",
                  "tp", "tcr", "bd", "tm", "rt_s", "composite")
GENERATOR_VERSION = 1


@dataclass(frozen=True)
class RunManifest:
    scenarios: tuple[str, ...]
    seeds: tuple[int, ...]
    solvers: tuple[SolverConfig, ...]

    def triples(self) -> list[tuple[str, int, SolverConfig]]:
        out = [(sc, seed, cfg) for sc in self.scenarios
               for seed in self.seeds for cfg in self.solvers]
        keys = {(sc, seed, json.dumps(cfg.as_dict(), sort_keys=True))
                for sc, seed, cfg in out}
        if len(keys) != len(out):
            raise ValueError("manifest contains duplicate (scenario, seed, solver) triples")
        return out


def load_manifest(path: Path) -> RunManifest:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed manifest: {exc}", str(path)) from exc
    solvers = tuple(
        SolverConfig(solver=s["solver"], objective=s.get("objective", "tp"),
                     seed=int(s.get("seed", 0)),
                     time_limit_s=float(s.get("time_limit_s", 60.0)),
                     params=dict(s.get("params", {})))
        for s in payload["solvers"]
    )
    return RunManifest(
        scenarios=tuple(payload["scenarios"]),
        seeds=tuple(int(x) for x in payload.get("seeds", range(SEEDS_PER_SCENARIO))),
        solvers=solvers,
    )


def cache_root(cache_dir: Optional[Path] = None) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "eossched"


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _instance_key(scenario_id: str, seed: int) -> str:
    raw = f"instance|v{GENERATOR_VERSION}|{scenario_id}|{seed}"
    return hashlib.sha256(raw.encode()).hexdigest()


def _run_key(scenario_id: str, seed: int, config: SolverConfig) -> str:
    raw = (f"run|v{GENERATOR_VERSION}|{scenario_id}|{seed}|"
           + json.dumps(config.as_dict(), sort_keys=True))
    return hashlib.sha256(raw.encode()).hexdigest()


def cached_instance(scenario_id: str, seed: int,
                    cache_dir: Optional[Path] = None) -> Instance:
    """Generate (or load from the digest-keyed cache) one instance."""
    root = cache_root(cache_dir)
    path = root / "instances" / f"{_instance_key(scenario_id, seed)}.json"
    if path.exists():
        return deserialize_instance(path.read_bytes())
    instance = generate_instance(scenario_by_id(scenario_id), seed)
    _atomic_write(path, serialize_instance(instance))
    return instance


def _execute_triple(scenario_id: str, seed: int, config_dict: dict,
                    cache_dir: str) -> dict:
    """Worker body: one (scenario, seed, solver) run, cached by content key."""
    config = SolverConfig(**config_dict)
    root = Path(cache_dir)
    run_path = root / "runs" / f"{_run_key(scenario_id, seed, config)}.json"
    if run_path.exists():
        return json.loads(run_path.read_text())["row"]
    instance = cached_instance(scenario_id, seed, root)
    schedule = solve(instance, config)
    report = evaluate(schedule, instance, schedule.wall_time_s)
    row = {
        "level": "instance", "scenario": scenario_id, "seed": str(seed),
        "instance_id": instance.id, "solver": config.tag,
        "tp": repr(report.tp), "tcr": repr(report.tcr),
        "bd": "" if report.bd is None else repr(report.bd),
        "tm": repr(report.tm), "rt_s": repr(report.rt_s),
        "composite": repr(report.composite_all),
    }
    artifact = {"row": row, "schedule": schedule_payload(schedule)}
    _atomic_write(run_path, json.dumps(artifact, sort_keys=True, indent=1).encode())
    return row


def _aggregate(rows: list[dict]) -> list[dict]:
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["scenario"], row["solver"]), []).append(row)
    out = []
    for (scenario, solver), members in sorted(groups.items()):
        agg = {"level": "scenario", "scenario": scenario, "seed": "",
               "instance_id": "", "solver": solver}
        for col in ("tp", "tcr", "bd", "tm", "rt_s", "composite"):
            values = [float(m[col]) for m in members if m[col] != ""]
            agg[col] = repr(sum(values) / len(values)) if values else ""
        out.append(agg)
    return out


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def run_campaign(manifest: RunManifest, out_dir: Path, jobs: int = 1,
                 cache_dir: Optional[Path] = None) -> Path:
    """Run every triple, write per-run artifacts and the results table.

    Failures are recorded per triple in ``failures.json`` without aborting
    the rest of the campaign.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    root = cache_root(cache_dir)
    triples = manifest.triples()

    rows: list[dict] = []
    failures: list[dict] = []
    if jobs <= 1:
        for scenario_id, seed, config in triples:
            try:
                rows.append(_execute_triple(scenario_id, seed,
                                            config.as_dict(), str(root)))
            except Exception as exc:  # keep going; the row is recorded as failed
                failures.append({"scenario": scenario_id, "seed": seed,
                                 "solver": config.tag, "error": repr(exc)})
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(_execute_triple, scenario_id, seed,
                            config.as_dict(), str(root)): (scenario_id, seed, config)
                for scenario_id, seed, config in triples
            }
            for future in concurrent.futures.as_completed(futures):
                scenario_id, seed, config = futures[future]
                try:
                    rows.append(future.result())
                except Exception as exc:
                    failures.append({"scenario": scenario_id, "seed": seed,
                                     "solver": config.tag, "error": repr(exc)})

    rows.sort(key=lambda r: (r["scenario"], int(r["seed"]), r["solver"]))
    table = rows + _aggregate(rows)
    results_path = out / "results.csv"
    results_path.write_text(rows_to_csv(table))
    if failures:
        failures.sort(key=lambda f: (f["scenario"], f["seed"], f["solver"]))
        (out / "failures.json").write_text(json.dumps(failures, indent=1))
    return results_path


def characterise_scenario(scenario_id: str, seeds: Sequence[int],
                          step_s: Optional[float] = None,
                          cache_dir: Optional[Path] = None
                          ) -> tuple[list[charlib.DescriptorReport], charlib.DescriptorReport]:
    """Instance-level descriptor reports for each seed plus their scenario mean."""
    reports = []
    for seed in seeds:
        instance = cached_instance(scenario_id, seed, cache_dir)
        reports.append(charlib.characterise(instance, step_s))
    return reports, charlib.aggregate(reports)


def report_summary(results_csv: Path, descriptors_csv: Optional[Path] = None) -> str:
    """Join scenario-level result rows with descriptor columns (left join)."""
    with open(results_csv, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["level"] == "scenario"]
    if not rows:
        raise ValueError("results table has no scenario-level rows")

    desc_by_scenario: dict[str, dict] = {}
    desc_fields: list[str] = []
    if descriptors_csv is not None and Path(descriptors_csv).exists():
        with open(descriptors_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            desc_fields = [c for c in reader.fieldnames or [] if c != "scenario"]
            for r in reader:
                desc_by_scenario[r["scenario"]] = r

    columns = [c for c in RESULT_COLUMNS if c not in ("level", "seed", "instance_id")]
    columns += desc_fields + ["descriptors_missing"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n",
                            extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        desc = desc_by_scenario.get(row["scenario"])
        merged = dict(row)
        if desc is None:
            merged["descriptors_missing"] = "1"
        else:
            merged["descriptors_missing"] = "0"
            for col in desc_fields:
                merged[col] = desc[col]
        writer.writerow(merged)
    return buf.getvalue()

"""Command-line surface: generate, characterise, solve, evaluate, campaign,
export-scene and report subcommands."""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from . import campaign as camp
from . import descriptors as charlib
from .core import (
    deserialize_instance,
    deserialize_schedule,
    serialize_instance,
    serialize_schedule,
    validate_instance,
)
from .metrics import evaluate
from .scenarios import (
    SEEDS_PER_SCENARIO,
    all_scenarios,
    generate_instance,
    scenario_by_id,
)
from .scene import export_scene, to_czml
from .solvers import SolverConfig, solve

FAMILIES = ("standard", "capacity", "agility", "constellation", "realistic", "all")


def _parse_seeds(spec: str) -> list[int]:
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


@click.group()
def main():
    """Benchmark toolkit for Earth-observation satellite scheduling."""


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), default="all")
@click.option("--filter", "filter_", default="", help="Substring filter on scenario ids.")
@click.option("--seeds", default="0-9", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output directory for instance files.")
@click.option("--list", "list_only", is_flag=True, help="List matching scenarios and exit.")
@click.option("--manifest-out", type=click.Path(path_type=Path), default=None,
              help="Write the matching templates and their parameters as JSON.")
@click.option("--agility", type=click.Choice(["high", "standard", "low", "limited"]),
              default=None, help="Override the manoeuvrability profile.")
@click.option("--window-step", type=float, default=None,
              help="Override the visibility sampling step in seconds.")
@click.option("--slot-step", type=float, default=None,
              help="Override the opportunity slot step in seconds.")
def generate(family, filter_, seeds, out, list_only, manifest_out, agility,
             window_step, slot_step):
    """Generate benchmark instances for matching scenarios."""
    templates = [t for t in all_scenarios()
                 if (family == "all" or t.family == family) and filter_ in t.id]
    if agility is not None:
        templates = [dataclasses.replace(t, agility_profile=agility)
                     for t in templates]
    if manifest_out is not None:
        manifest_out.write_text(json.dumps(
            [dataclasses.asdict(t) for t in templates],
            indent=1, sort_keys=True, default=str) + "\n")
        click.echo(manifest_out)
        if out is None and not list_only:
            return
    if list_only:
        for t in templates:
            click.echo(t.id)
        click.echo(f"{len(templates)} scenarios", err=True)
        return
    if not templates:
        raise click.ClickException("no scenarios match the given family/filter")
    if out is None:
        raise click.ClickException("--out is required unless --list is given")
    out.mkdir(parents=True, exist_ok=True)
    seed_list = _parse_seeds(seeds)
    bad = [s for s in seed_list if not 0 <= s < SEEDS_PER_SCENARIO]
    if bad:
        raise click.ClickException(f"seeds outside 0..{SEEDS_PER_SCENARIO - 1}: {bad}")
    for template in templates:
        for seed in seed_list:
            instance = generate_instance(template, seed,
                                         window_step_s=window_step,
                                         slot_step_s=slot_step)
            path = out / f"{instance.id}.json"
            path.write_bytes(serialize_instance(instance))
            click.echo(path)


@main.command()
@click.option("--in", "instance_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="One instance file.")
@click.option("--in-dir", type=click.Path(exists=True, path_type=Path), default=None,
              help="Directory of instance files (batch mode, per-scenario means).")
@click.option("--step", type=float, default=None, help="Analysis grid step in seconds.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def characterise(instance_path, in_dir, step, out):
    """Compute structural-difficulty descriptors before solving."""
    if (instance_path is None) == (in_dir is None):
        raise click.ClickException("give exactly one of --in or --in-dir")
    if instance_path is not None:
        instance = deserialize_instance(instance_path.read_bytes())
        report = charlib.characterise(instance, step)
        out.write_text(json.dumps(report.as_dict(), indent=1, sort_keys=True) + "\n")
        click.echo(out)
        return
    by_scenario: dict[str, list[charlib.DescriptorReport]] = {}
    for path in sorted(in_dir.glob("*.json")):
        instance = deserialize_instance(path.read_bytes())
        by_scenario.setdefault(instance.provenance.scenario_id, []).append(
            charlib.characterise(instance, step))
    out.mkdir(parents=True, exist_ok=True)
    for scenario_id, reports in sorted(by_scenario.items()):
        payload = {
            "scenario": scenario_id,
            "instances": [r.as_dict() for r in reports],
            "scenario_level": charlib.aggregate(reports).as_dict(),
        }
        path = out / f"{scenario_id}.descriptors.json"
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        click.echo(path)


@main.command()
@click.option("--in", "instance_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--solver", "solver_name", required=True)
@click.option("--objective", default="tp", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--time-limit", type=float, default=60.0, show_default=True)
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE",
              help="Method-specific parameter override (repeatable).")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def solve_cmd(instance_path, solver_name, objective, seed, time_limit, params, out):
    """Solve one instance and write the schedule file."""
    overrides = {}
    for item in params:
        key, _, value = item.partition("=")
        overrides[key] = json.loads(value)
    instance = deserialize_instance(instance_path.read_bytes())
    problems = validate_instance(instance)
    if problems:
        raise click.ClickException(f"instance fails validation: {problems[0]}")
    config = SolverConfig(solver=solver_name, objective=objective, seed=seed,
                          time_limit_s=time_limit, params=overrides)
    schedule = solve(instance, config)
    out.write_bytes(serialize_schedule(schedule))
    click.echo(f"{out} ({len(schedule.assignments)} assignments, "
               f"{schedule.wall_time_s:.3f}s)")


main.add_command(solve_cmd, name="solve")


@main.command()
@click.option("--schedule", "schedule_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--instance", "instance_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def evaluate_cmd(schedule_path, instance_path, out):
    """Validate and score one schedule against its instance."""
    instance = deserialize_instance(instance_path.read_bytes())
    schedule = deserialize_schedule(schedule_path.read_bytes())
    report = evaluate(schedule, instance, schedule.wall_time_s)
    payload = {
        "instance_id": instance.id, "solver": schedule.solver,
        "tp": report.tp, "tcr": report.tcr, "bd": report.bd, "tm": report.tm,
        "rt_s": report.rt_s, "composite": report.composite_all,
    }
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text)
        click.echo(out)


main.add_command(evaluate_cmd, name="evaluate")


@main.command()
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
              help=f"Cache directory (defaults to ${camp.CACHE_ENV} or ~/.cache/eossched).")
def campaign(manifest, out, jobs, cache_dir):
    """Run a full (scenario x seed x solver) campaign with caching."""
    m = camp.load_manifest(manifest)
    results = camp.run_campaign(m, out, jobs=jobs, cache_dir=cache_dir)
    click.echo(results)


@main.command(name="export-scene")
@click.option("--instance", "instance_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--schedule", "schedule_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--czml", is_flag=True, help="Emit packet-based globe-viewer format instead.")
def export_scene_cmd(instance_path, schedule_path, out, czml):
    """Write a static scene file for external viewers."""
    instance = deserialize_instance(instance_path.read_bytes())
    schedule = deserialize_schedule(schedule_path.read_bytes())
    scene = export_scene(instance, schedule)
    payload = to_czml(scene) if czml else scene
    out.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    click.echo(out)


@main.command(name="report")
@click.option("--results", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--descriptors", type=click.Path(path_type=Path), default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def report_cmd(results, descriptors, out):
    """Summarise a results table, joining per-scenario descriptor columns."""
    out.write_text(camp.report_summary(results, descriptors))
    click.echo(out)


if __name__ == "__main__":
    sys.exit(main())

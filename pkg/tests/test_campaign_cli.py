import csv
import io
import json

import pytest
from click.testing import CliRunner

from eossched import campaign as camp
from eossched.cli import main
from eossched.core import deserialize_instance, deserialize_schedule
from eossched.solvers import SolverConfig

SC_A = "std-ag-gr-h012-s0001-t00010"
SC_B = "std-ag-gr-h012-s0003-t00010"

FAST_SA = {"iters_per_temp": 10, "t_min_ratio": 0.1}


@pytest.fixture(scope="module")
def campaign_dirs(tmp_path_factory):
    base = tmp_path_factory.mktemp("camp")
    manifest = camp.RunManifest(
        scenarios=(SC_A, SC_B), seeds=(0, 1),
        solvers=(SolverConfig("greedy_tp", params={"restarts": 2}),
                 SolverConfig("sa", "tp", params=FAST_SA)),
    )
    cache = base / "cache"
    out = base / "out"
    results = camp.run_campaign(manifest, out, jobs=1, cache_dir=cache)
    return manifest, cache, out, results


def test_campaign_row_cardinality(campaign_dirs):
    manifest, cache, out, results = campaign_dirs
    with open(results, newline="") as fh:
        rows = list(csv.DictReader(fh))
    instance_rows = [r for r in rows if r["level"] == "instance"]
    scenario_rows = [r for r in rows if r["level"] == "scenario"]
    assert len(instance_rows) == 2 * 2 * 2   # scenarios x seeds x solvers
    assert len(scenario_rows) == 2 * 2       # (scenario, solver) aggregates


def test_campaign_rerun_is_idempotent(campaign_dirs):
    manifest, cache, out, results = campaign_dirs
    first = results.read_bytes()
    again = camp.run_campaign(manifest, out.parent / "out2", jobs=2,
                              cache_dir=cache)
    assert again.read_bytes() == first


def test_scenario_rows_are_seed_means(campaign_dirs):
    manifest, cache, out, results = campaign_dirs
    with open(results, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for agg in (r for r in rows if r["level"] == "scenario"):
        members = [r for r in rows if r["level"] == "instance"
                   and r["scenario"] == agg["scenario"]
                   and r["solver"] == agg["solver"]]
        for col in ("tp", "tcr", "tm", "composite"):
            mean = sum(float(m[col]) for m in members) / len(members)
            assert float(agg[col]) == pytest.approx(mean, abs=1e-12)


def test_manifest_duplicate_rejected():
    manifest = camp.RunManifest(
        scenarios=(SC_A, SC_A), seeds=(0,),
        solvers=(SolverConfig("greedy_tp"),))
    with pytest.raises(ValueError, match="duplicate"):
        manifest.triples()


def test_report_joins_descriptors(campaign_dirs, tmp_path):
    manifest, cache, out, results = campaign_dirs
    desc_csv = tmp_path / "descriptors.csv"
    reports, scenario_level = camp.characterise_scenario(SC_A, [0, 1],
                                                         cache_dir=cache)
    with open(desc_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "gamma_ao", "lambda_oc"])
        writer.writerow([SC_A, scenario_level.gamma_ao, scenario_level.lambda_oc])
    summary = camp.report_summary(results, desc_csv)
    rows = list(csv.DictReader(io.StringIO(summary)))
    assert len(rows) == 4  # join keeps every scenario-level row
    joined = [r for r in rows if r["scenario"] == SC_A]
    missing = [r for r in rows if r["scenario"] == SC_B]
    assert all(r["descriptors_missing"] == "0" and r["gamma_ao"] for r in joined)
    assert all(r["descriptors_missing"] == "1" for r in missing)


def test_interrupted_campaign_resumes_to_same_table(campaign_dirs, tmp_path):
    manifest, cache, out, results = campaign_dirs
    # a partial run (as if interrupted after the first seed) followed by the
    # full manifest must reproduce the uninterrupted table exactly
    partial = camp.RunManifest(manifest.scenarios, (0,), manifest.solvers)
    resume_cache = tmp_path / "cache"
    camp.run_campaign(partial, tmp_path / "part", jobs=1, cache_dir=resume_cache)
    resumed = camp.run_campaign(manifest, tmp_path / "full", jobs=1,
                                cache_dir=resume_cache)
    def strip_rt(text):
        rows = list(csv.DictReader(io.StringIO(text)))
        return [{k: v for k, v in r.items() if k != "rt_s"} for r in rows]
    assert strip_rt(resumed.read_text()) == strip_rt(results.read_text())


def test_failures_recorded_without_aborting(tmp_path):
    manifest = camp.RunManifest(
        scenarios=(SC_A,), seeds=(0,),
        solvers=(SolverConfig("greedy_tp", params={"restarts": 2}),
                 SolverConfig("sa", "tp", params={"no_such_knob": 3})))
    out = tmp_path / "out"
    camp.run_campaign(manifest, out, cache_dir=tmp_path / "cache")
    failures = json.loads((out / "failures.json").read_text())
    assert len(failures) == 1 and failures[0]["solver"] == "sa-tp"
    with open(out / "results.csv", newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["level"] == "instance"]
    assert len(rows) == 1


# ---------------------------------------------------------------------------
# CLI surface
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def cli_artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    res = runner.invoke(main, ["generate", "--filter", SC_A, "--seeds", "0",
                               "--out", str(root)])
    assert res.exit_code == 0, res.output
    instance_path = root / f"{SC_A}--i00.json"
    assert instance_path.exists()
    return runner, root, instance_path


def test_cli_generate_list(cli_artifacts):
    runner, root, _ = cli_artifacts
    res = runner.invoke(main, ["generate", "--family", "realistic", "--list"])
    assert res.exit_code == 0
    ids = [l for l in res.output.splitlines() if l.startswith("real-")]
    assert len(ids) == 10


def test_cli_scenario_manifest_export(cli_artifacts, tmp_path):
    runner, root, _ = cli_artifacts
    path = tmp_path / "scenarios.json"
    res = runner.invoke(main, ["generate", "--family", "agility",
                               "--manifest-out", str(path)])
    assert res.exit_code == 0, res.output
    entries = json.loads(path.read_text())
    assert len(entries) == 36
    assert {e["agility_profile"] for e in entries} == {"high", "low", "limited"}
    assert all("horizon_s" in e and "task_count" in e for e in entries)


def test_cli_agility_override(cli_artifacts, tmp_path):
    runner, root, _ = cli_artifacts
    out = tmp_path / "inst"
    res = runner.invoke(main, ["generate", "--filter", SC_A, "--seeds", "0",
                               "--agility", "limited", "--out", str(out)])
    assert res.exit_code == 0, res.output
    inst = deserialize_instance(next(out.glob("*.json")).read_bytes())
    assert all(s.agility_profile == "limited" for s in inst.satellites)


def test_cli_solve_evaluate_and_scene(cli_artifacts, tmp_path):
    runner, root, instance_path = cli_artifacts
    sched_path = tmp_path / "schedule.json"
    res = runner.invoke(main, [
        "solve", "--in", str(instance_path), "--solver", "greedy_tp",
        "--seed", "3", "--param", "restarts=2", "--out", str(sched_path)])
    assert res.exit_code == 0, res.output
    schedule = deserialize_schedule(sched_path.read_bytes())
    assert schedule.solver == "greedy-tp"

    res = runner.invoke(main, ["evaluate", "--schedule", str(sched_path),
                               "--instance", str(instance_path)])
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert 0.0 <= payload["tcr"] <= 1.0

    scene_path = tmp_path / "scene.json"
    res = runner.invoke(main, ["export-scene", "--instance", str(instance_path),
                               "--schedule", str(sched_path),
                               "--out", str(scene_path)])
    assert res.exit_code == 0, res.output
    scene = json.loads(scene_path.read_text())
    assert scene["scene_version"] == 1
    assert len(scene["links"]) == len(schedule.assignments)
    assert set(scene["ground_tracks"]) == {"ALOS-2"}
    # deterministic export
    scene_path2 = tmp_path / "scene2.json"
    runner.invoke(main, ["export-scene", "--instance", str(instance_path),
                         "--schedule", str(sched_path), "--out", str(scene_path2)])
    assert scene_path2.read_text() == scene_path.read_text()

    czml_path = tmp_path / "scene.czml.json"
    res = runner.invoke(main, ["export-scene", "--instance", str(instance_path),
                               "--schedule", str(sched_path), "--czml",
                               "--out", str(czml_path)])
    assert res.exit_code == 0
    packets = json.loads(czml_path.read_text())
    assert packets[0]["id"] == "document"


def test_cli_empty_schedule_scene(cli_artifacts, tmp_path):
    runner, root, instance_path = cli_artifacts
    instance = deserialize_instance(instance_path.read_bytes())
    from eossched.core import Schedule, serialize_schedule
    empty = Schedule(instance.id, (), solver="none")
    sched_path = tmp_path / "empty.json"
    sched_path.write_bytes(serialize_schedule(empty))
    scene_path = tmp_path / "scene.json"
    res = runner.invoke(main, ["export-scene", "--instance", str(instance_path),
                               "--schedule", str(sched_path),
                               "--out", str(scene_path)])
    assert res.exit_code == 0, res.output
    scene = json.loads(scene_path.read_text())
    assert scene["links"] == []
    assert scene["targets"] and scene["ground_tracks"]


def test_cli_characterise_single_and_batch(cli_artifacts, tmp_path):
    runner, root, instance_path = cli_artifacts
    out = tmp_path / "report.json"
    res = runner.invoke(main, ["characterise", "--in", str(instance_path),
                               "--step", "1", "--out", str(out)])
    assert res.exit_code == 0, res.output
    payload = json.loads(out.read_text())
    assert payload["level"] == "instance" and payload["analysis_step_s"] == 1.0

    batch_dir = tmp_path / "batch"
    res = runner.invoke(main, ["characterise", "--in-dir", str(root),
                               "--out", str(batch_dir)])
    assert res.exit_code == 0, res.output
    files = list(batch_dir.glob("*.descriptors.json"))
    assert len(files) == 1
    payload = json.loads(files[0].read_text())
    assert payload["scenario_level"]["level"] == "scenario"


def test_cli_campaign_and_report(tmp_path):
    runner = CliRunner()
    manifest = {
        "scenarios": [SC_A],
        "seeds": [0, 1],
        "solvers": [{"solver": "greedy_tp", "params": {"restarts": 2}}],
    }
    mpath = tmp_path / "manifest.json"
    mpath.write_text(json.dumps(manifest))
    out = tmp_path / "campaign"
    res = runner.invoke(main, ["campaign", "--manifest", str(mpath),
                               "--out", str(out),
                               "--cache-dir", str(tmp_path / "cache")])
    assert res.exit_code == 0, res.output
    results = out / "results.csv"
    assert results.exists()

    summary = tmp_path / "summary.csv"
    res = runner.invoke(main, ["report", "--results", str(results),
                               "--out", str(summary)])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(summary.open()))
    assert len(rows) == 1 and rows[0]["descriptors_missing"] == "1"

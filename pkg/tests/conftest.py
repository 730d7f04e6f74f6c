import random

import pytest

from eossched.core import (
    AttitudeEnvelope,
    AvailableOpportunity,
    Instance,
    OrbitalElements,
    Platform,
    Provenance,
    SatelliteSpec,
    TaskSpec,
    VisibleWindow,
)
from eossched.descriptors import build_synthetic_instance

TOY_WINDOWS = [
    ("A", "S1", 0.0, 4.0),
    ("A", "S2", 5.0, 8.0),
    ("B", "S1", 3.0, 6.0),
    ("C", "S2", 6.0, 9.0),
]
TOY_DURATIONS = {"A": 3, "B": 3, "C": 2, "D": 3}


@pytest.fixture(scope="session")
def toy_instance():
    """Two satellites, four tasks, horizon 10, unit transition time."""
    return build_synthetic_instance(TOY_WINDOWS, TOY_DURATIONS,
                                    transition_const=1.0, horizon_s=10.0)


def make_fuzz_instance(seed: int, max_candidates: int = 0) -> Instance:
    """Random small synthetic instance; optionally capped in candidate count."""
    rng = random.Random(seed)
    for attempt in range(50):
        n_sats = rng.randint(2, 3)
        n_tasks = rng.randint(3, 6)
        horizon = float(rng.randint(60, 200))
        sat_ids = [f"S{i}" for i in range(n_sats)]
        durations, profits, windows = {}, {}, []
        for t in range(n_tasks):
            tid = f"T{t}"
            dur = rng.randint(2, 10)
            durations[tid] = dur
            profits[tid] = rng.randint(1, 10)
            for _ in range(rng.randint(0, 3)):
                length = rng.randint(dur, dur + 12)
                start = rng.randint(0, max(0, int(horizon) - length))
                windows.append((tid, rng.choice(sat_ids),
                                float(start), float(start + length)))
        tight = rng.random() < 0.3
        inst = build_synthetic_instance(
            windows, durations,
            transition_const=rng.choice([0.5, 1.0, 2.0, 5.0]),
            horizon_s=horizon, satellites=sat_ids, profits=profits,
            slot_step_s=float(rng.choice([2, 3, 5])),
            energy_per_orbit=float(rng.randint(12, 40)) if tight else 200.0,
            storage_per_orbit=float(rng.randint(15, 60)) if tight else 2400.0,
            instance_id=f"fuzz-{seed}",
        )
        if max_candidates == 0 or 2 <= len(inst.opportunities) <= max_candidates:
            return inst
        rng = random.Random(seed * 31 + attempt + 1)
    return inst


@pytest.fixture
def fuzz_instance():
    return make_fuzz_instance(7)


def make_agile_instance(attitudes, gaps, duration=10, horizon=4000.0,
                        profile="standard"):
    """One agile satellite with hand-built constant-attitude windows.

    ``attitudes`` is a list of (roll, pitch, yaw) per observation slot;
    ``gaps`` the idle time inserted before each window (len == len(attitudes)).
    Each window admits exactly one opportunity.
    """
    elements = OrbitalElements(7013.62362, 0.000898, 98.04, 57.345, 101.516, 96.459)
    sat = SatelliteSpec("SAT", elements, AttitudeEnvelope.agile(max_yaw_deg=90.0),
                        agility_profile=profile)
    tasks, windows, opps = [], [], []
    t = 0.0
    for k, ((roll, pitch, yaw), gap) in enumerate(zip(attitudes, gaps)):
        t += gap
        tid = f"T{k}"
        tasks.append(TaskSpec(tid, 0.0, float(k), 5, 5, duration))
        track = ((t, roll, pitch, yaw), (t + duration, roll, pitch, yaw))
        windows.append(VisibleWindow(tid, "SAT", t, t + duration, track=track))
        opps.append(AvailableOpportunity(tid, "SAT", k, t, t + duration))
        t += duration
    return Instance(
        id="agile-manual", horizon_s=horizon, platform=Platform.AGILE,
        satellites=(sat,), tasks=tuple(tasks), visible_windows=tuple(windows),
        opportunities=tuple(opps), provenance=Provenance("manual", 0),
    )

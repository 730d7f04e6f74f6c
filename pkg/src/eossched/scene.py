"""Static scene export for external globe viewers.

Produces a self-describing JSON document with time-tagged ground tracks,
target markers and one observation-link entity per scheduled assignment,
plus an optional converter to CZML-style packets for web globe viewers.
"""

from __future__ import annotations

import math

import numpy as np

from .astro import EARTH_ROTATION_RAD_S, propagate_many
from .core import EARTH_RADIUS_KM, Instance, Schedule
from .feasibility import validate_schedule
from .metrics import InfeasibleScheduleError

SCENE_VERSION = 1
TRACK_STEP_S = 30.0


def _ground_track(sat, horizon_s: float) -> list[list[float]]:
    n = max(1, int(math.floor(horizon_s / TRACK_STEP_S)))
    times = np.arange(n + 1, dtype=float) * TRACK_STEP_S
    times = times[times <= horizon_s]
    pos, _ = propagate_many(sat.elements, times)
    r = np.linalg.norm(pos, axis=1)
    lat = np.degrees(np.arcsin(pos[:, 2] / r))
    lon = np.degrees(np.arctan2(pos[:, 1], pos[:, 0]) - EARTH_ROTATION_RAD_S * times)
    lon = (lon + 180.0) % 360.0 - 180.0
    alt = r - EARTH_RADIUS_KM
    return [[float(t), round(float(la), 6), round(float(lo), 6), round(float(al), 3)]
            for t, la, lo, al in zip(times, lat, lon, alt)]


def export_scene(instance: Instance, schedule: Schedule) -> dict:
    """Scene document for a validated schedule; refuses infeasible input."""
    report = validate_schedule(schedule, instance)
    if not report.ok:
        raise InfeasibleScheduleError("cannot export a scene for an infeasible schedule")
    tasks = instance.task_map()
    links = []
    for a in sorted(schedule.assignments, key=lambda a: (a.task_id, a.start_s)):
        links.append({
            "satellite": a.satellite_id,
            "task": a.task_id,
            "start_s": float(a.start_s),
            "end_s": float(a.start_s + tasks[a.task_id].duration_s),
        })
    return {
        "scene_version": SCENE_VERSION,
        "instance_id": instance.id,
        "epoch": instance.epoch,
        "horizon_s": float(instance.horizon_s),
        "ground_tracks": {
            sat.id: _ground_track(sat, instance.horizon_s)
            for sat in instance.satellites
        },
        "targets": [
            {"id": t.id, "lat_deg": float(t.lat_deg), "lon_deg": float(t.lon_deg),
             "priority": t.priority, "profit": t.profit}
            for t in instance.tasks
        ],
        "links": links,
        "solver": schedule.solver,
    }


def _iso_offset(epoch: str, seconds: float) -> str:
    # scene times are epoch-relative; viewers get ISO strings
    from datetime import datetime, timedelta, timezone
    base = datetime.fromisoformat(epoch.replace("Z", "+00:00"))
    stamp = base + timedelta(seconds=seconds)
    return stamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


def to_czml(scene: dict) -> list[dict]:
    """Convert a scene document into packet-based globe-viewer entities."""
    epoch = scene["epoch"]
    horizon = scene["horizon_s"]
    availability = f"{_iso_offset(epoch, 0.0)}/{_iso_offset(epoch, horizon)}"
    packets = [{
        "id": "document",
        "name": scene["instance_id"],
        "version": "1.0",
        "clock": {"interval": availability, "currentTime": _iso_offset(epoch, 0.0)},
    }]
    for sat_id, track in scene["ground_tracks"].items():
        coords: list[float] = []
        for t, lat, lon, alt in track:
            coords.extend([t, lon, lat, alt * 1000.0])
        packets.append({
            "id": f"sat/{sat_id}",
            "availability": availability,
            "point": {"pixelSize": 6},
            "position": {"epoch": _iso_offset(epoch, 0.0),
                         "cartographicDegrees": coords},
        })
    for target in scene["targets"]:
        packets.append({
            "id": f"target/{target['id']}",
            "availability": availability,
            "point": {"pixelSize": 4},
            "position": {"cartographicDegrees": [target["lon_deg"],
                                                 target["lat_deg"], 0.0]},
        })
    for link in scene["links"]:
        packets.append({
            "id": f"link/{link['satellite']}/{link['task']}",
            "availability": (f"{_iso_offset(epoch, link['start_s'])}/"
                             f"{_iso_offset(epoch, link['end_s'])}"),
            "parent": f"sat/{link['satellite']}",
        })
    return packets

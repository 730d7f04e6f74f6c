"""Shared domain types, validation and canonical serialization.

Every other module works on the immutable types defined here.  Times are
real-valued seconds since the start of the planning horizon; the scenario
epoch is stored once per instance as a UTC timestamp string.  Serialization
is canonical (sorted keys, shortest round-trip float repr) so that equal
instances always produce identical bytes and content digests.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

SCHEMA_VERSION = 1

EARTH_RADIUS_KM = 6378.137
MU_EARTH_KM3_S2 = 398600.4418
EARTH_ROTATION_RAD_S = 7.2921159e-5

DEFAULT_ENERGY_PER_ORBIT = 200.0
DEFAULT_STORAGE_PER_ORBIT = 2400.0


class Platform(str, Enum):
    AGILE = "agile"
    NON_AGILE = "non_agile"


class ParseError(ValueError):
    """Raised when a serialized artifact cannot be decoded.

    Carries a human-readable ``location`` (byte offset / field path) so the
    offending part of the file can be found.
    """

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message} (at {location})" if location else message)
        self.location = location


@dataclass(frozen=True)
class OrbitalElements:
    """Classical Keplerian elements at a reference epoch (UTC ISO string)."""

    semi_major_axis_km: float
    eccentricity: float
    inclination_deg: float
    raan_deg: float
    arg_perigee_deg: float
    true_anomaly_deg: float
    epoch: str = "2025-11-18T12:00:00Z"


@dataclass(frozen=True)
class AttitudeEnvelope:
    """Symmetric attitude bounds; non-agile platforms are roll-only."""

    platform: Platform
    max_roll_deg: float = 45.0
    max_pitch_deg: float = 45.0
    max_yaw_deg: float = 90.0

    @staticmethod
    def agile(max_roll_deg: float = 45.0, max_pitch_deg: float = 45.0,
              max_yaw_deg: float = 90.0) -> "AttitudeEnvelope":
        return AttitudeEnvelope(Platform.AGILE, max_roll_deg, max_pitch_deg, max_yaw_deg)

    @staticmethod
    def non_agile(max_roll_deg: float = 45.0) -> "AttitudeEnvelope":
        return AttitudeEnvelope(Platform.NON_AGILE, max_roll_deg, 0.0, 0.0)


@dataclass(frozen=True)
class ResourceCapacities:
    """Per-orbit budgets in normalised units."""

    energy_per_orbit: float = DEFAULT_ENERGY_PER_ORBIT
    storage_per_orbit: float = DEFAULT_STORAGE_PER_ORBIT


@dataclass(frozen=True)
class PayloadRates:
    """Normalised consumption rates of the imaging payload."""

    obs_energy_rate: float = 1.0   # units per second of imaging
    obs_memory_rate: float = 1.0   # units per second of imaging
    slew_energy_rate: float = 1.0  # units per degree of attitude change


@dataclass(frozen=True)
class SatelliteSpec:
    id: str
    elements: OrbitalElements
    envelope: AttitudeEnvelope
    capacities: ResourceCapacities = ResourceCapacities()
    rates: PayloadRates = PayloadRates()
    agility_profile: str = "standard"


@dataclass(frozen=True)
class TaskSpec:
    """A point target with its scheduling attributes."""

    id: str
    lat_deg: float
    lon_deg: float
    priority: int
    profit: int
    duration_s: int


@dataclass(frozen=True)
class VisibleWindow:
    """A continuous feasible observation interval for one (task, satellite) pair.

    Agile windows carry a time-sampled attitude track of
    ``(time_s, roll_deg, pitch_deg, yaw_deg)`` rows; non-agile windows carry a
    single fixed roll angle held for the whole observation.
    """

    task_id: str
    satellite_id: str
    start_s: float
    end_s: float
    track: Optional[tuple[tuple[float, float, float, float], ...]] = None
    fixed_roll_deg: Optional[float] = None


@dataclass(frozen=True)
class AvailableOpportunity:
    """One concrete start slot inside a visible window."""

    task_id: str
    satellite_id: str
    window_index: int
    start_s: float
    end_s: float


@dataclass(frozen=True)
class Provenance:
    scenario_id: str = ""
    seed: int = 0
    fallback: bool = False


@dataclass(frozen=True)
class Instance:
    """One concrete scheduling problem, reproducible from (scenario id, seed)."""

    id: str
    horizon_s: float
    platform: Platform
    satellites: tuple[SatelliteSpec, ...]
    tasks: tuple[TaskSpec, ...]
    visible_windows: tuple[VisibleWindow, ...]
    opportunities: tuple[AvailableOpportunity, ...]
    provenance: Provenance = Provenance()
    epoch: str = "2025-11-18T12:00:00Z"
    # When set, every pairwise minimum separation uses this constant instead of
    # the platform transition model (used by injected synthetic instances).
    transition_override_s: Optional[float] = None

    def satellite_map(self) -> dict[str, SatelliteSpec]:
        return {s.id: s for s in self.satellites}

    def task_map(self) -> dict[str, TaskSpec]:
        return {t.id: t for t in self.tasks}


@dataclass(frozen=True)
class Assignment:
    """The decision to run a task on a satellite starting at an opportunity."""

    satellite_id: str
    task_id: str
    opportunity_index: int
    start_s: float


@dataclass(frozen=True)
class Schedule:
    instance_id: str
    assignments: tuple[Assignment, ...]
    solver: str = ""
    wall_time_s: float = 0.0
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    detail: str = ""


def _norm_angle(x: float) -> bool:
    return 0.0 <= x < 360.0


def validate_instance(instance: Instance) -> list[Violation]:
    """Check every type invariant; an empty report means the instance is valid.

    Violations are data, not exceptions: each one names the offending entity
    and the rule it breaks.
    """
    out: list[Violation] = []

    if not instance.horizon_s > 0:
        out.append(Violation(instance.id, "horizon_positive", f"horizon_s={instance.horizon_s}"))

    seen_sats: set[str] = set()
    for sat in instance.satellites:
        if sat.id in seen_sats:
            out.append(Violation(sat.id, "satellite_id_unique"))
        seen_sats.add(sat.id)
        el = sat.elements
        if not el.semi_major_axis_km > EARTH_RADIUS_KM:
            out.append(Violation(sat.id, "semi_major_axis_above_surface",
                                 f"a={el.semi_major_axis_km}"))
        if not 0.0 <= el.eccentricity < 1.0:
            out.append(Violation(sat.id, "eccentricity_range", f"e={el.eccentricity}"))
        if not 0.0 <= el.inclination_deg <= 180.0:
            out.append(Violation(sat.id, "inclination_range", f"i={el.inclination_deg}"))
        for name, val in (("raan_deg", el.raan_deg), ("arg_perigee_deg", el.arg_perigee_deg),
                          ("true_anomaly_deg", el.true_anomaly_deg)):
            if not _norm_angle(val):
                out.append(Violation(sat.id, "angle_normalised", f"{name}={val}"))
        env = sat.envelope
        if min(env.max_roll_deg, env.max_pitch_deg, env.max_yaw_deg) < 0:
            out.append(Violation(sat.id, "envelope_nonnegative"))
        if env.platform is Platform.NON_AGILE and (env.max_pitch_deg != 0 or env.max_yaw_deg != 0):
            out.append(Violation(sat.id, "non_agile_roll_only",
                                 f"pitch={env.max_pitch_deg} yaw={env.max_yaw_deg}"))
        if not (sat.capacities.energy_per_orbit > 0 and sat.capacities.storage_per_orbit > 0):
            out.append(Violation(sat.id, "capacities_positive"))
        if min(sat.rates.obs_energy_rate, sat.rates.obs_memory_rate,
               sat.rates.slew_energy_rate) < 0:
            out.append(Violation(sat.id, "rates_nonnegative"))

    seen_tasks: set[str] = set()
    for task in instance.tasks:
        if task.id in seen_tasks:
            out.append(Violation(task.id, "task_id_unique"))
        seen_tasks.add(task.id)
        if not -90.0 <= task.lat_deg <= 90.0:
            out.append(Violation(task.id, "latitude_range", f"lat={task.lat_deg}"))
        if not -180.0 < task.lon_deg <= 180.0:
            out.append(Violation(task.id, "longitude_range", f"lon={task.lon_deg}"))
        if not 1 <= task.priority <= 10:
            out.append(Violation(task.id, "priority_range", f"priority={task.priority}"))
        if not 1 <= task.profit <= 10:
            out.append(Violation(task.id, "profit_range", f"profit={task.profit}"))
        # Generated attributes draw durations in 5..15 s; validity only needs a
        # positive integer so that injected instances with shorter tasks pass.
        if not (isinstance(task.duration_s, int) and task.duration_s >= 1):
            out.append(Violation(task.id, "duration_positive_integer",
                                 f"duration_s={task.duration_s}"))

    sat_map = instance.satellite_map()
    for widx, win in enumerate(instance.visible_windows):
        label = f"window[{widx}]"
        if win.task_id not in seen_tasks:
            out.append(Violation(label, "window_task_exists", win.task_id))
        if win.satellite_id not in seen_sats:
            out.append(Violation(label, "window_satellite_exists", win.satellite_id))
        if not (0.0 <= win.start_s < win.end_s <= instance.horizon_s):
            out.append(Violation(label, "window_within_horizon",
                                 f"[{win.start_s}, {win.end_s}] horizon={instance.horizon_s}"))
        if win.track is not None:
            sat = sat_map.get(win.satellite_id)
            if sat is not None:
                env = sat.envelope
                pitch_bound = env.max_pitch_deg if env.platform is Platform.AGILE else 2.5
                for t, roll, pitch, yaw in win.track:
                    if abs(roll) > env.max_roll_deg + 1e-9 or abs(pitch) > pitch_bound + 1e-9:
                        out.append(Violation(label, "track_within_envelope",
                                             f"t={t} roll={roll} pitch={pitch}"))
                        break

    task_durations = {t.id: t.duration_s for t in instance.tasks}
    for oidx, opp in enumerate(instance.opportunities):
        label = f"opportunity[{oidx}]"
        if not 0 <= opp.window_index < len(instance.visible_windows):
            out.append(Violation(label, "opportunity_window_exists", str(opp.window_index)))
            continue
        win = instance.visible_windows[opp.window_index]
        if opp.task_id != win.task_id or opp.satellite_id != win.satellite_id:
            out.append(Violation(label, "opportunity_matches_window"))
        if not (win.start_s - 1e-9 <= opp.start_s and opp.end_s <= win.end_s + 1e-9):
            out.append(Violation(label, "opportunity_inside_window",
                                 f"[{opp.start_s}, {opp.end_s}] in [{win.start_s}, {win.end_s}]"))
        dur = task_durations.get(opp.task_id)
        if dur is not None and abs((opp.end_s - opp.start_s) - dur) > 1e-9:
            out.append(Violation(label, "opportunity_length_is_duration",
                                 f"len={opp.end_s - opp.start_s} duration={dur}"))

    return out


# ---------------------------------------------------------------------------
# Canonical serialization (see docs/formats.md for the exact field layout)
# ---------------------------------------------------------------------------

def _canonical_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, separators=(",", ":"),
                       allow_nan=False) + "\n").encode("utf-8")


def _elements_payload(el: OrbitalElements) -> dict:
    return {
        "semi_major_axis_km": float(el.semi_major_axis_km),
        "eccentricity": float(el.eccentricity),
        "inclination_deg": float(el.inclination_deg),
        "raan_deg": float(el.raan_deg),
        "arg_perigee_deg": float(el.arg_perigee_deg),
        "true_anomaly_deg": float(el.true_anomaly_deg),
        "epoch": el.epoch,
    }


def _satellite_payload(sat: SatelliteSpec) -> dict:
    return {
        "id": sat.id,
        "elements": _elements_payload(sat.elements),
        "envelope": {
            "platform": sat.envelope.platform.value,
            "max_roll_deg": float(sat.envelope.max_roll_deg),
            "max_pitch_deg": float(sat.envelope.max_pitch_deg),
            "max_yaw_deg": float(sat.envelope.max_yaw_deg),
        },
        "capacities": {
            "energy_per_orbit": float(sat.capacities.energy_per_orbit),
            "storage_per_orbit": float(sat.capacities.storage_per_orbit),
        },
        "rates": {
            "obs_energy_rate": float(sat.rates.obs_energy_rate),
            "obs_memory_rate": float(sat.rates.obs_memory_rate),
            "slew_energy_rate": float(sat.rates.slew_energy_rate),
        },
        "agility_profile": sat.agility_profile,
    }


def instance_payload(instance: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "instance",
        "id": instance.id,
        "horizon_s": float(instance.horizon_s),
        "platform": instance.platform.value,
        "epoch": instance.epoch,
        "provenance": {
            "scenario_id": instance.provenance.scenario_id,
            "seed": int(instance.provenance.seed),
            "fallback": bool(instance.provenance.fallback),
        },
        "transition_override_s": (None if instance.transition_override_s is None
                                  else float(instance.transition_override_s)),
        "satellites": [_satellite_payload(s) for s in instance.satellites],
        "tasks": [
            {"id": t.id, "lat_deg": float(t.lat_deg), "lon_deg": float(t.lon_deg),
             "priority": int(t.priority), "profit": int(t.profit),
             "duration_s": int(t.duration_s)}
            for t in instance.tasks
        ],
        "visible_windows": [
            {"task": w.task_id, "sat": w.satellite_id,
             "start_s": float(w.start_s), "end_s": float(w.end_s),
             "track": (None if w.track is None
                       else [[float(x) for x in row] for row in w.track]),
             "fixed_roll_deg": (None if w.fixed_roll_deg is None
                                else float(w.fixed_roll_deg))}
            for w in instance.visible_windows
        ],
        "opportunities": [
            [o.task_id, o.satellite_id, int(o.window_index),
             float(o.start_s), float(o.end_s)]
            for o in instance.opportunities
        ],
    }


def serialize_instance(instance: Instance) -> bytes:
    return _canonical_bytes(instance_payload(instance))


def _require(payload: dict, key: str, where: str):
    if key not in payload:
        raise ParseError(f"missing field '{key}'", where)
    return payload[key]


def _load_json(data: bytes, kind: str) -> dict:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        pos = getattr(exc, "pos", "?")
        raise ParseError(f"malformed {kind} file: {exc}", f"byte {pos}") from exc
    if not isinstance(payload, dict):
        raise ParseError(f"{kind} file must contain a JSON object", "$")
    got = payload.get("kind")
    if got != kind:
        raise ParseError(f"expected kind '{kind}', found '{got}'", "$.kind")
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {payload.get('schema_version')}",
                         "$.schema_version")
    return payload


def instance_from_payload(payload: dict) -> Instance:
    try:
        sats = tuple(
            SatelliteSpec(
                id=s["id"],
                elements=OrbitalElements(**s["elements"]),
                envelope=AttitudeEnvelope(
                    platform=Platform(s["envelope"]["platform"]),
                    max_roll_deg=s["envelope"]["max_roll_deg"],
                    max_pitch_deg=s["envelope"]["max_pitch_deg"],
                    max_yaw_deg=s["envelope"]["max_yaw_deg"],
                ),
                capacities=ResourceCapacities(**s["capacities"]),
                rates=PayloadRates(**s["rates"]),
                agility_profile=s["agility_profile"],
            )
            for s in payload["satellites"]
        )
        tasks = tuple(
            TaskSpec(id=t["id"], lat_deg=t["lat_deg"], lon_deg=t["lon_deg"],
                     priority=t["priority"], profit=t["profit"],
                     duration_s=t["duration_s"])
            for t in payload["tasks"]
        )
        windows = tuple(
            VisibleWindow(
                task_id=w["task"], satellite_id=w["sat"],
                start_s=w["start_s"], end_s=w["end_s"],
                track=(None if w["track"] is None
                       else tuple(tuple(row) for row in w["track"])),
                fixed_roll_deg=w["fixed_roll_deg"],
            )
            for w in payload["visible_windows"]
        )
        opps = tuple(
            AvailableOpportunity(task_id=o[0], satellite_id=o[1], window_index=o[2],
                                 start_s=o[3], end_s=o[4])
            for o in payload["opportunities"]
        )
        prov = payload["provenance"]
        return Instance(
            id=payload["id"],
            horizon_s=payload["horizon_s"],
            platform=Platform(payload["platform"]),
            satellites=sats,
            tasks=tasks,
            visible_windows=windows,
            opportunities=opps,
            provenance=Provenance(prov["scenario_id"], prov["seed"], prov["fallback"]),
            epoch=payload["epoch"],
            transition_override_s=payload["transition_override_s"],
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"invalid instance payload: {exc!r}", "$") from exc


def deserialize_instance(data: bytes) -> Instance:
    return instance_from_payload(_load_json(data, "instance"))


def instance_digest(instance: Instance) -> str:
    return hashlib.sha256(serialize_instance(instance)).hexdigest()


def schedule_payload(schedule: Schedule) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "schedule",
        "instance_id": schedule.instance_id,
        "solver": schedule.solver,
        "wall_time_s": float(schedule.wall_time_s),
        "notes": list(schedule.notes),
        "assignments": [
            [a.satellite_id, a.task_id, int(a.opportunity_index), float(a.start_s)]
            for a in schedule.assignments
        ],
    }


def serialize_schedule(schedule: Schedule) -> bytes:
    return _canonical_bytes(schedule_payload(schedule))


def deserialize_schedule(data: bytes) -> Schedule:
    payload = _load_json(data, "schedule")
    try:
        return Schedule(
            instance_id=payload["instance_id"],
            assignments=tuple(
                Assignment(satellite_id=a[0], task_id=a[1],
                           opportunity_index=a[2], start_s=a[3])
                for a in payload["assignments"]
            ),
            solver=payload["solver"],
            wall_time_s=payload["wall_time_s"],
            notes=tuple(payload["notes"]),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ParseError(f"invalid schedule payload: {exc!r}", "$") from exc


def schedule_digest(schedule: Schedule) -> str:
    return hashlib.sha256(serialize_schedule(schedule)).hexdigest()


def sort_assignments(assignments: Iterable[Assignment]) -> tuple[Assignment, ...]:
    """Canonical assignment order used in every serialized schedule."""
    return tuple(sorted(assignments,
                        key=lambda a: (a.task_id, a.satellite_id, a.start_s)))

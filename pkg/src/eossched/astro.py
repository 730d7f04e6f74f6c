"""Orbit propagation, viewing geometry and access-window generation.

Propagation is two-body Keplerian (Newton iteration on Kepler's equation,
tolerance 1e-12 rad) with the Earth modelled as a rotating sphere; this keeps
the module dependency-free while preserving the window structure needed at
benchmark level.  A higher-fidelity propagator can be substituted behind
``propagate`` without touching anything downstream.

Conventions: the orbital frame has x along-track, y completing the triad and
z pointing to nadir; pitch tilts the boresight along-track, roll cross-track,
yaw is zero for line-of-sight pointing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RAD_S,
    MU_EARTH_KM3_S2,
    AttitudeEnvelope,
    AvailableOpportunity,
    OrbitalElements,
    Platform,
    SatelliteSpec,
    TaskSpec,
    VisibleWindow,
)

KEPLER_TOL_RAD = 1e-12
KEPLER_MAX_ITER = 64

# Non-agile platforms image at (or just off) nadir: the along-track pointing
# tolerance that stands in for an unspecified sensor half-angle.
NON_AGILE_PITCH_TOL_DEG = 2.5

# Window-boundary bisection refines to step / BISECTION_DIVISOR seconds.
BISECTION_DIVISOR = 100.0


@dataclass(frozen=True)
class SatState:
    """Earth-centered inertial position (km) and velocity (km/s) at a time."""

    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    time_s: float


@dataclass(frozen=True)
class LookAngles:
    roll_deg: float
    pitch_deg: float
    yaw_deg: float = 0.0


def orbital_period_s(semi_major_axis_km: float) -> float:
    return 2.0 * math.pi * math.sqrt(semi_major_axis_km ** 3 / MU_EARTH_KM3_S2)


def _solve_kepler(mean_anomaly: np.ndarray, ecc: float) -> np.ndarray:
    """Eccentric anomaly from mean anomaly, Newton iteration."""
    m = np.mod(mean_anomaly, 2.0 * math.pi)
    e_anom = np.where(ecc < 0.8, m, np.full_like(m, math.pi))
    for _ in range(KEPLER_MAX_ITER):
        delta = (e_anom - ecc * np.sin(e_anom) - m) / (1.0 - ecc * np.cos(e_anom))
        e_anom = e_anom - delta
        if np.max(np.abs(delta)) < KEPLER_TOL_RAD:
            break
    return e_anom


def _perifocal_to_eci(elements: OrbitalElements) -> np.ndarray:
    o = math.radians(elements.raan_deg)
    i = math.radians(elements.inclination_deg)
    w = math.radians(elements.arg_perigee_deg)
    co, so = math.cos(o), math.sin(o)
    ci, si = math.cos(i), math.sin(i)
    cw, sw = math.cos(w), math.sin(w)
    return np.array([
        [co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si],
        [so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si],
        [sw * si, cw * si, ci],
    ])


def mean_from_true_anomaly(true_anomaly_rad: float, ecc: float) -> float:
    e_anom = 2.0 * math.atan2(
        math.sqrt(1.0 - ecc) * math.sin(true_anomaly_rad / 2.0),
        math.sqrt(1.0 + ecc) * math.cos(true_anomaly_rad / 2.0),
    )
    return e_anom - ecc * math.sin(e_anom)


def true_from_mean_anomaly(mean_anomaly_rad: float, ecc: float) -> float:
    e_anom = float(_solve_kepler(np.asarray([mean_anomaly_rad]), ecc)[0])
    return 2.0 * math.atan2(
        math.sqrt(1.0 + ecc) * math.sin(e_anom / 2.0),
        math.sqrt(1.0 - ecc) * math.cos(e_anom / 2.0),
    )


def propagate_many(elements: OrbitalElements, times_s: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized two-body propagation: (N,3) positions km, (N,3) velocities km/s."""
    a = elements.semi_major_axis_km
    e = elements.eccentricity
    n = math.sqrt(MU_EARTH_KM3_S2 / a ** 3)
    m0 = mean_from_true_anomaly(math.radians(elements.true_anomaly_deg), e)
    m = m0 + n * np.asarray(times_s, dtype=float)
    e_anom = _solve_kepler(m, e)
    cos_e, sin_e = np.cos(e_anom), np.sin(e_anom)
    r = a * (1.0 - e * cos_e)
    x_pf = a * (cos_e - e)
    y_pf = a * math.sqrt(1.0 - e * e) * sin_e
    # Perifocal velocities from the vis-viva relations.
    factor = math.sqrt(MU_EARTH_KM3_S2 * a) / r
    vx_pf = -factor * sin_e
    vy_pf = factor * math.sqrt(1.0 - e * e) * cos_e
    rot = _perifocal_to_eci(elements)
    pos_pf = np.stack([x_pf, y_pf, np.zeros_like(x_pf)], axis=1)
    vel_pf = np.stack([vx_pf, vy_pf, np.zeros_like(vx_pf)], axis=1)
    return pos_pf @ rot.T, vel_pf @ rot.T


def propagate(elements: OrbitalElements, t_s: float) -> SatState:
    """State at ``epoch + t_s`` seconds."""
    pos, vel = propagate_many(elements, np.asarray([t_s], dtype=float))
    return SatState(tuple(pos[0]), tuple(vel[0]), t_s)


def target_eci(lat_deg: float, lon_deg: float, t_s: float) -> np.ndarray:
    """Inertial position of a ground point; the prime meridian is aligned
    with the inertial x axis at t = 0 (the scenario epoch)."""
    lam = math.radians(lon_deg) + EARTH_ROTATION_RAD_S * t_s
    phi = math.radians(lat_deg)
    return EARTH_RADIUS_KM * np.array([
        math.cos(phi) * math.cos(lam),
        math.cos(phi) * math.sin(lam),
        math.sin(phi),
    ])


def targets_eci_many(lat_deg: np.ndarray, lon_deg: np.ndarray,
                     times_s: np.ndarray) -> np.ndarray:
    """(T, N, 3) inertial positions for T targets over N epochs."""
    lam = np.radians(lon_deg)[:, None] + EARTH_ROTATION_RAD_S * np.asarray(times_s)[None, :]
    phi = np.radians(lat_deg)[:, None]
    cphi = np.cos(phi)
    return EARTH_RADIUS_KM * np.stack(
        [cphi * np.cos(lam), cphi * np.sin(lam),
         np.broadcast_to(np.sin(phi), lam.shape)], axis=2)


def _targets_eci_paired(lat_deg: np.ndarray, lon_deg: np.ndarray,
                        times_s: np.ndarray) -> np.ndarray:
    """(N, 3) inertial positions for N (target, epoch) pairs."""
    lam = np.radians(lon_deg) + EARTH_ROTATION_RAD_S * np.asarray(times_s)
    phi = np.radians(lat_deg)
    cphi = np.cos(phi)
    return EARTH_RADIUS_KM * np.stack(
        [cphi * np.cos(lam), cphi * np.sin(lam), np.sin(phi)], axis=1)


def _look_angle_arrays(sat_pos: np.ndarray, sat_vel: np.ndarray,
                       tgt_pos: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Roll/pitch (deg) of the line of sight plus an LOS-feasibility mask.

    ``sat_pos``/``sat_vel`` are (..., 3); ``tgt_pos`` broadcasts against them.
    LOS holds when the satellite sits above the target's local horizon plane.
    """
    d = tgt_pos - sat_pos
    # above-horizon test: (sat - tgt) . tgt > 0
    los = np.sum((sat_pos - tgt_pos) * tgt_pos, axis=-1) > 0.0

    r_norm = np.linalg.norm(sat_pos, axis=-1, keepdims=True)
    z_hat = -sat_pos / r_norm
    v_rad = np.sum(sat_vel * z_hat, axis=-1, keepdims=True) * z_hat
    x_vec = sat_vel - v_rad
    x_hat = x_vec / np.linalg.norm(x_vec, axis=-1, keepdims=True)
    y_hat = np.cross(z_hat, x_hat)

    d_norm = np.linalg.norm(d, axis=-1, keepdims=True)
    l_vec = d / np.where(d_norm == 0.0, 1.0, d_norm)
    lx = np.sum(l_vec * x_hat, axis=-1)
    ly = np.sum(l_vec * y_hat, axis=-1)
    lz = np.sum(l_vec * z_hat, axis=-1)

    pitch = np.degrees(np.arctan2(lx, lz))
    roll = np.degrees(np.arctan2(ly, np.hypot(lx, lz)))
    return roll, pitch, los


def look_angles(state: SatState, target: tuple[float, float]) -> Optional[LookAngles]:
    """Roll/pitch of the line of sight, or None when the Earth blocks it."""
    sat_pos = np.asarray(state.position)
    sat_vel = np.asarray(state.velocity)
    tgt = target_eci(target[0], target[1], state.time_s)
    roll, pitch, los = _look_angle_arrays(sat_pos, sat_vel, tgt)
    if not bool(los):
        return None
    return LookAngles(float(roll), float(pitch), 0.0)


def pitch_bound_deg(envelope: AttitudeEnvelope) -> float:
    if envelope.platform is Platform.NON_AGILE:
        return NON_AGILE_PITCH_TOL_DEG
    return envelope.max_pitch_deg


def visibility(state: SatState, target: tuple[float, float],
               envelope: AttitudeEnvelope) -> bool:
    """Instantaneous visibility: line of sight plus attitude feasibility."""
    angles = look_angles(state, target)
    if angles is None:
        return False
    return (abs(angles.roll_deg) <= envelope.max_roll_deg
            and abs(angles.pitch_deg) <= pitch_bound_deg(envelope))


def _visible_mask(elements: OrbitalElements, envelope: AttitudeEnvelope,
                  lat_deg: np.ndarray, lon_deg: np.ndarray,
                  times_s: np.ndarray) -> np.ndarray:
    """(T, N) visibility mask for T targets over N sampled epochs."""
    sat_pos, sat_vel = propagate_many(elements, times_s)
    tgt = targets_eci_many(lat_deg, lon_deg, times_s)
    roll, pitch, los = _look_angle_arrays(sat_pos[None, :, :], sat_vel[None, :, :], tgt)
    return (los & (np.abs(roll) <= envelope.max_roll_deg)
            & (np.abs(pitch) <= pitch_bound_deg(envelope)))


def _angles_paired(elements: OrbitalElements, lat: np.ndarray, lon: np.ndarray,
                   times: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pos, vel = propagate_many(elements, times)
    tgt = _targets_eci_paired(lat, lon, times)
    return _look_angle_arrays(pos, vel, tgt)


def _visible_paired(elements: OrbitalElements, envelope: AttitudeEnvelope,
                    lat: np.ndarray, lon: np.ndarray,
                    times: np.ndarray) -> np.ndarray:
    roll, pitch, los = _angles_paired(elements, lat, lon, times)
    return (los & (np.abs(roll) <= envelope.max_roll_deg)
            & (np.abs(pitch) <= pitch_bound_deg(envelope)))


def _refine_edges(sat: SatelliteSpec, lat: np.ndarray, lon: np.ndarray,
                  t_false: np.ndarray, t_true: np.ndarray,
                  step_s: float) -> np.ndarray:
    """Batched bisection of visibility edges; returns the refined visible
    endpoints (bracket width shrunk below step_s / BISECTION_DIVISOR)."""
    if len(t_false) == 0:
        return t_true
    iters = max(1, math.ceil(math.log2(BISECTION_DIVISOR)))
    f = t_false.astype(float).copy()
    t = t_true.astype(float).copy()
    for _ in range(iters):
        mid = 0.5 * (f + t)
        vis = _visible_paired(sat.elements, sat.envelope, lat, lon, mid)
        t = np.where(vis, mid, t)
        f = np.where(vis, f, mid)
    return t


def _window_samples(start: float, end: float, step_s: float) -> list[float]:
    out = [start]
    t = start + step_s
    while t < end:
        out.append(t)
        t += step_s
    out.append(end)
    return out


def compute_all_windows(satellites: Sequence[SatelliteSpec],
                        tasks: Sequence[TaskSpec],
                        horizon_s: float, step_s: float) -> list[VisibleWindow]:
    """Visible windows for every (satellite, task) pair, in canonical order.

    Visibility is sampled every ``step_s`` seconds; maximal visible runs
    become windows with boundaries refined by bisection to step_s/100, and
    windows shorter than the task duration are discarded.  Agile windows
    carry an attitude track sampled at ``step_s``; non-agile windows carry
    the fixed roll at the window midpoint.
    """
    if step_s <= 0:
        raise ValueError("step_s must be positive")
    if horizon_s <= 0 or not satellites or not tasks:
        return []
    n_steps = int(math.floor(horizon_s / step_s))
    times = np.arange(n_steps + 1, dtype=float) * step_s
    if times[-1] < horizon_s - 1e-9:
        times = np.append(times, horizon_s)
    lat = np.array([t.lat_deg for t in tasks], dtype=float)
    lon = np.array([t.lon_deg for t in tasks], dtype=float)

    windows: list[VisibleWindow] = []
    for sat in satellites:
        mask = _visible_mask(sat.elements, sat.envelope, lat, lon, times)
        runs: list[tuple[int, int, int]] = []  # (task index, i0, i1)
        for ti in range(len(tasks)):
            row = mask[ti]
            if not row.any():
                continue
            padded = np.diff(np.concatenate(([False], row, [False])).astype(np.int8))
            for i0, i1 in zip(np.flatnonzero(padded == 1),
                              np.flatnonzero(padded == -1) - 1):
                runs.append((ti, int(i0), int(i1)))
        if not runs:
            continue

        # refine all left and right edges of this satellite in one batch
        left = [(k, r) for k, r in enumerate(runs) if r[1] > 0]
        right = [(k, r) for k, r in enumerate(runs) if r[2] < len(times) - 1]
        starts = np.array([times[r[1]] for r in runs])
        ends = np.array([min(times[r[2]], horizon_s) for r in runs])
        if left:
            idx = [k for k, _ in left]
            refined = _refine_edges(
                sat,
                np.array([lat[r[0]] for _, r in left]),
                np.array([lon[r[0]] for _, r in left]),
                np.array([times[r[1] - 1] for _, r in left]),
                np.array([times[r[1]] for _, r in left]),
                step_s)
            starts[idx] = refined
        if right:
            idx = [k for k, _ in right]
            refined = _refine_edges(
                sat,
                np.array([lat[r[0]] for _, r in right]),
                np.array([lon[r[0]] for _, r in right]),
                np.array([times[r[2] + 1] for _, r in right]),
                np.array([times[r[2]] for _, r in right]),
                step_s)
            ends[idx] = np.minimum(refined, horizon_s)

        kept = [(r[0], float(starts[k]), float(ends[k]))
                for k, r in enumerate(runs)
                if ends[k] - starts[k] >= tasks[r[0]].duration_s]
        if not kept:
            continue

        if sat.envelope.platform is Platform.AGILE:
            sample_t: list[float] = []
            sample_win: list[int] = []
            for w, (ti, start, end) in enumerate(kept):
                ts = _window_samples(start, end, step_s)
                sample_t.extend(ts)
                sample_win.extend([w] * len(ts))
            st = np.asarray(sample_t)
            wi = np.asarray(sample_win)
            task_of_window = np.array([ti for ti, _, _ in kept])
            roll, pitch, los = _angles_paired(
                sat.elements, lat[task_of_window[wi]], lon[task_of_window[wi]], st)
            ok = (los & (np.abs(roll) <= sat.envelope.max_roll_deg)
                  & (np.abs(pitch) <= pitch_bound_deg(sat.envelope)))
            for w, (ti, start, end) in enumerate(kept):
                sel = (wi == w) & ok
                track = tuple(
                    (float(t), float(r), float(p), 0.0)
                    for t, r, p in zip(st[sel], roll[sel], pitch[sel]))
                if track:
                    windows.append(VisibleWindow(tasks[ti].id, sat.id, start, end,
                                                 track=track))
        else:
            mids = np.array([(s + e) / 2.0 for _, s, e in kept])
            roll, _, _ = _angles_paired(
                sat.elements, np.array([lat[ti] for ti, _, _ in kept]),
                np.array([lon[ti] for ti, _, _ in kept]), mids)
            for (ti, start, end), r in zip(kept, roll):
                windows.append(VisibleWindow(tasks[ti].id, sat.id, start, end,
                                             fixed_roll_deg=float(r)))

    windows.sort(key=lambda w: (w.task_id, w.satellite_id, w.start_s))
    return windows


def compute_visible_windows(sat: SatelliteSpec, task: TaskSpec,
                            horizon_s: float, step_s: float) -> list[VisibleWindow]:
    """Maximal visibility intervals for one (satellite, task) pair."""
    if step_s <= 0:
        raise ValueError("step_s must be positive")
    if horizon_s <= 0:
        return []
    return compute_all_windows([sat], [task], horizon_s, step_s)


def derive_opportunities(window: VisibleWindow, duration_s: float,
                         slot_step_s: float, window_index: int = 0
                         ) -> list[AvailableOpportunity]:
    """Start slots inside a window: the regular grid plus the latest start.

    Returns an empty list when the window is shorter than the duration.
    """
    if slot_step_s <= 0:
        raise ValueError("slot_step_s must be positive")
    length = window.end_s - window.start_s
    if duration_s > length + 1e-9:
        return []
    last = window.end_s - duration_s
    starts = [window.start_s]
    t = window.start_s + slot_step_s
    while t < last - 1e-9:
        starts.append(t)
        t += slot_step_s
    if last - starts[-1] > 1e-9:
        starts.append(last)
    return [
        AvailableOpportunity(window.task_id, window.satellite_id, window_index,
                             s, s + duration_s)
        for s in starts
    ]


def specific_orbital_energy(state: SatState) -> float:
    r = math.sqrt(sum(x * x for x in state.position))
    v2 = sum(v * v for v in state.velocity)
    return v2 / 2.0 - MU_EARTH_KM3_S2 / r

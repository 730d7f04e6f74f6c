"""Attitude transition-time model.

The time needed to reorient between two observations is a piecewise linear
function of the total look-angle change ``delta_g = |droll| + |dpitch| +
|dyaw|``, with breakpoints at 10/30/60/90 degrees and a floor of ~11.66 s
(the exact floor is 35/3 s so the curve is continuous at the first
breakpoint).  Non-agile platforms use a fixed 10 s stabilisation delay
between consecutive observations instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Assignment, Instance, Platform

BREAKPOINTS_DEG = (10.0, 30.0, 60.0, 90.0)
# Offsets paired with the standard velocities; held fixed for all named
# profiles, which leaves small jumps at the breakpoints for non-standard
# profiles (only the standard curve is exactly continuous).
OFFSETS_S = (5.0, 10.0, 16.0, 22.0)
# Floor of the transition curve.  35/3 s equals OFFSETS_S[0] + 10/v1 for the
# standard velocity set, i.e. the value usually quoted rounded as 11.66 s.
MIN_TRANSITION_S = 5.0 + 10.0 / 1.5

NON_AGILE_TRANSITION_S = 10.0

_BUILTIN_VELOCITIES = {
    "high": (3.00, 4.00, 5.00, 6.00),
    "standard": (1.50, 2.00, 2.50, 3.00),
    "low": (0.75, 1.00, 1.25, 1.50),
    "limited": (0.50, 0.67, 0.83, 1.00),
}


@dataclass(frozen=True)
class AgilityProfile:
    """Angular-velocity settings (deg/s) for the four transition segments."""

    name: str
    velocities: tuple[float, float, float, float]
    offsets: tuple[float, float, float, float] = OFFSETS_S
    min_time_s: float = MIN_TRANSITION_S

    @staticmethod
    def builtin(name: str) -> "AgilityProfile":
        key = name.lower()
        if key not in _BUILTIN_VELOCITIES:
            raise ValueError(f"unknown agility profile '{name}'; "
                             f"expected one of {sorted(_BUILTIN_VELOCITIES)}")
        return AgilityProfile(key, _BUILTIN_VELOCITIES[key])

    @staticmethod
    def custom(velocities: tuple[float, float, float, float],
               name: str = "custom") -> "AgilityProfile":
        """Build a profile whose offsets are recomputed for exact continuity."""
        v1, v2, v3, v4 = velocities
        if min(velocities) <= 0:
            raise ValueError("angular velocities must be positive")
        b1, b2, b3 = BREAKPOINTS_DEG[0], BREAKPOINTS_DEG[1], BREAKPOINTS_DEG[2]
        b4 = BREAKPOINTS_DEG[3]
        a1 = MIN_TRANSITION_S - b1 / v1
        a2 = a1 + b2 / v1 - b2 / v2
        a3 = a2 + b3 / v2 - b3 / v3
        a4 = a3 + b4 / v3 - b4 / v4
        return AgilityProfile(name, velocities, (a1, a2, a3, a4))


def builtin_profile_names() -> tuple[str, ...]:
    return tuple(_BUILTIN_VELOCITIES)


def transition_time(delta_g_deg: float, profile: AgilityProfile) -> float:
    """Piecewise-linear slew time in seconds for a total angle change.

    All profiles share the same minimum transition time, so the piecewise
    value is clamped from below at ``profile.min_time_s``.
    """
    if delta_g_deg < 0:
        raise ValueError(f"delta_g must be non-negative, got {delta_g_deg}")
    if delta_g_deg <= BREAKPOINTS_DEG[0]:
        return profile.min_time_s
    for bound, a, v in zip(BREAKPOINTS_DEG[1:], profile.offsets[:3], profile.velocities[:3]):
        if delta_g_deg <= bound:
            return max(profile.min_time_s, a + delta_g_deg / v)
    return max(profile.min_time_s,
               profile.offsets[3] + delta_g_deg / profile.velocities[3])


def delta_g(att_a: tuple[float, float, float], att_b: tuple[float, float, float]) -> float:
    """Total look-angle change: sum of absolute per-axis differences."""
    return (abs(att_a[0] - att_b[0]) + abs(att_a[1] - att_b[1])
            + abs(att_a[2] - att_b[2]))


def window_attitude(window, t_s: float) -> tuple[float, float, float]:
    """Attitude of a window at an epoch: nearest track sample, or the fixed roll."""
    if window.track:
        best = min(window.track, key=lambda row: abs(row[0] - t_s))
        return (best[1], best[2], best[3])
    roll = window.fixed_roll_deg if window.fixed_roll_deg is not None else 0.0
    return (roll, 0.0, 0.0)


def assignment_attitudes(assignment: Assignment, instance: Instance
                         ) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """(start, end) attitudes of an assignment read from its parent window."""
    opp = instance.opportunities[assignment.opportunity_index]
    window = instance.visible_windows[opp.window_index]
    return (window_attitude(window, opp.start_s), window_attitude(window, opp.end_s))


def min_separation(a: Assignment, b: Assignment, instance: Instance) -> float:
    """Required gap between the end of ``a`` and the start of ``b`` (same satellite)."""
    if a.satellite_id != b.satellite_id:
        raise ValueError("minimum separation is defined for assignments "
                         "on the same satellite")
    if instance.transition_override_s is not None:
        return instance.transition_override_s
    if instance.platform is Platform.NON_AGILE:
        return NON_AGILE_TRANSITION_S
    sat = instance.satellite_map()[a.satellite_id]
    profile = AgilityProfile.builtin(sat.agility_profile)
    _, att_a_end = assignment_attitudes(a, instance)
    att_b_start, _ = assignment_attitudes(b, instance)
    return transition_time(delta_g(att_a_end, att_b_start), profile)

"""Scenario space and instance generation.

The benchmark grid is the cross product of platform type, planning horizon,
constellation, mission load and target distribution; specific families vary
resource capacity, manoeuvrability, constellation layout and realistic city
targets one at a time.  Every instance is reproducible from its scenario id
and seed index: target pools are pre-generated per distribution, split into
10 disjoint subsets, and instance k draws its tasks from subset k.
"""

from __future__ import annotations

import csv
import importlib.resources
import math
import zlib
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .astro import (
    compute_all_windows,
    derive_opportunities,
    mean_from_true_anomaly,
    true_from_mean_anomaly,
)
from .core import (
    AttitudeEnvelope,
    AvailableOpportunity,
    Instance,
    OrbitalElements,
    Platform,
    Provenance,
    ResourceCapacities,
    SatelliteSpec,
    TaskSpec,
    VisibleWindow,
    instance_digest,
)

MASTER_SEED = 20251118
SEEDS_PER_SCENARIO = 10
REFERENCE_EPOCH = "2025-11-18T12:00:00Z"

DAY_S = 86400.0
STANDARD_HORIZONS_DAYS = (0.5, 1.0, 3.0, 7.0)

# (satellite count, admissible task counts) rows of the standard grid
MISSION_LOADS: tuple[tuple[int, tuple[int, ...]], ...] = (
    (1, (10, 20, 30, 40, 50, 100)),
    (3, (10, 50, 100, 200)),
    (5, (50, 100, 200, 500)),
    (10, (100, 200, 500, 1000)),
    (20, (100, 200, 500, 1000)),
    (50, (50, 100, 150, 200, 500)),
    (100, (100, 300, 500, 1000, 2000)),
    (200, (200, 500, 1000, 1500, 2000)),
    (500, (500, 1000, 1500, 2000, 5000)),
    (1000, (1000, 2000, 5000, 10000)),
)

# Default Walker-Delta layouts (planes, satellites per plane) by total count
WALKER_DEFAULTS: dict[int, tuple[int, int]] = {
    50: (10, 5), 100: (10, 10), 200: (20, 10), 500: (25, 20), 1000: (50, 20),
}

# Alternative layouts for the constellation-configuration family
WALKER_VARIANTS: dict[int, dict[str, tuple[int, int]]] = {
    50: {"few_planes": (5, 10), "many_planes": (25, 2)},
    100: {"few_planes": (4, 25), "many_planes": (20, 5)},
    200: {"few_planes": (10, 20), "many_planes": (40, 5)},
    500: {"few_planes": (10, 50), "many_planes": (50, 10)},
    1000: {"few_planes": (10, 100), "many_planes": (100, 10)},
}

CAPACITY_BASELINES: tuple[tuple[int, int], ...] = ((3, 200), (10, 500),
                                                   (100, 500), (500, 2000))
# scale factors (energy and storage alike); mixed patterns give the shares
# of high / standard / low satellites
CAPACITY_SCALES = {"low": 0.5, "standard": 1.0, "high": 1.5}
MIXED_CAPACITY_SHARES = {
    "mixed_a": (0.20, 0.60, 0.20),
    "mixed_b": (0.25, 0.50, 0.25),
    "mixed_c": (0.30, 0.40, 0.30),
}
CAPACITY_PATTERNS = ("low", "high", "mixed_a", "mixed_b", "mixed_c")

AGILITY_VARIANTS = ("high", "low", "limited")

CONSTELLATION_LOADS: tuple[tuple[int, tuple[int, int]], ...] = (
    (50, (100, 200)), (100, (100, 300)), (200, (100, 500)),
    (500, (100, 1000)), (1000, (100, 1000)),
)

REALISTIC_SIZES = (1, 3, 5, 10, 20)
REALISTIC_TASKS = 100

# Orbital elements of 20 operational Earth-observation satellites at the
# reference epoch (semi-major axis km, eccentricity, inclination, RAAN,
# argument of perigee, true anomaly; all angles in degrees).
REAL_SATELLITES: tuple[tuple[str, float, float, float, float, float, float], ...] = (
    ("ALOS-2", 7013.62362, 0.000898, 98.04, 57.345, 101.516, 96.459),
    ("AQUA", 7054.608686, 0.002665, 98.264, 282.658, 100.906, 181.914),
    ("CARTOSAT-2C", 6885.388452, 0.002331, 97.526, 19.64, 129.493, 269.449),
    ("DEIMOS-1", 7026.003591, 0.001598, 97.832, 123.909, 99.999, 287.41),
    ("DEIMOS-2", 6955.196768, 0.002894, 97.569, 198.785, 83.505, 180.934),
    ("GAOFEN-10R", 7004.506326, 0.002046, 97.874, 269.586, 82.424, 282.074),
    ("GOKTURK-1A", 7061.790586, 0.001387, 98.061, 214.868, 112.033, 286.074),
    ("GPM-CORE", 6801.857205, 0.001294, 64.827, 293.591, 284.823, 176.995),
    ("KENT-RIDGE-1", 6884.956782, 0.000964, 15.043, 31.097, 207.516, 57.259),
    ("SCD-1", 7121.14563, 0.003755, 25.1, 68.138, 73.8, 157.166),
    ("SCD-2", 7123.258992, 0.001882, 24.859, 291.105, 37.112, 275.948),
    ("SKYSAT-C2", 6833.433187, 0.00167, 97.006, 347.712, 69.009, 149.715),
    ("SKYSAT-C9", 6825.950288, 0.00325, 97.567, 92.251, 106.838, 162.537),
    ("SMOS", 7129.70257, 0.000962, 98.521, 147.596, 18.842, 100.232),
    ("SRMSAT", 7236.742741, 0.002142, 19.826, 254.192, 78.797, 37.063),
    ("TERRASAR-X", 6877.192296, 0.000926, 97.37, 327.892, 6.52, 107.452),
    ("WORLDVIEW-1", 6874.558678, 0.001374, 97.524, 79.993, 89.387, 281.492),
    ("YAOGAN-21", 6866.60274, 0.003193, 97.197, 6.525, 115.547, 184.675),
    ("YAOGAN-4", 6993.513131, 0.00264, 97.779, 252.523, 84.41, 221.626),
    ("ZIYUAN-3-2", 6866.915774, 0.002603, 97.497, 36.721, 72.615, 202.817),
)

SEED_ORBIT = OrbitalElements(7013.62362, 0.000898, 98.04, 57.345, 101.516,
                             96.459, epoch=REFERENCE_EPOCH)  # ALOS-2

# Coarse rectangular land model (lat_min, lat_max, lon_min, lon_max); any
# point drawn from these boxes counts as "on land" for benchmark purposes.
LAND_BOXES: tuple[tuple[float, float, float, float], ...] = (
    (25, 50, -125, -65),     # contiguous North America
    (50, 70, -165, -55),     # Canada / Alaska
    (8, 25, -115, -85),      # Mexico / Central America
    (-20, 10, -80, -45),     # northern South America
    (-55, -20, -73, -53),    # southern South America
    (36, 60, -10, 30),       # western / central Europe
    (55, 70, 5, 40),         # northern Europe
    (50, 70, 30, 90),        # western Russia
    (50, 72, 90, 179),       # Siberia
    (35, 55, 45, 90),        # Central Asia
    (12, 42, 26, 60),        # Middle East / Anatolia
    (8, 35, 60, 90),         # South Asia
    (20, 50, 90, 130),       # East Asia
    (30, 46, 125, 145),      # Korea / Japan
    (10, 28, 92, 110),       # mainland Southeast Asia
    (-10, 7, 95, 140),       # Malay archipelago
    (12, 35, -17, 35),       # northern Africa
    (-12, 12, 8, 42),        # central Africa
    (-35, -12, 12, 40),      # southern Africa
    (0, 12, 35, 50),         # Horn of Africa
    (-39, -12, 113, 153),    # Australia
    (-46, -35, 166, 178),    # New Zealand
    (-25, -12, 43, 50),      # Madagascar
)

# Five broad continental regions used by the clustered distribution
REGIONS: dict[str, tuple[float, float, float, float]] = {
    "asia": (5, 60, 60, 145),
    "europe": (36, 68, -10, 40),
    "africa": (-35, 35, -17, 50),
    "americas": (-55, 60, -120, -40),
    "oceania": (-45, -10, 112, 155),
}

# Demand hot spots the clustered distribution concentrates around
_REGION_CLUSTERS: dict[str, tuple[tuple[float, float], ...]] = {
    "asia": ((32.0, 112.0), (22.0, 78.0), (38.0, 128.0)),
    "europe": ((48.0, 5.0), (51.0, 20.0), (41.0, 25.0)),
    "africa": ((9.0, 4.0), (-3.0, 28.0), (-27.0, 26.0)),
    "americas": ((40.0, -95.0), (20.0, -100.0), (-12.0, -55.0), (-33.0, -63.0)),
    "oceania": ((-32.0, 147.0), (-38.0, 174.0)),
}


class Distribution(str, Enum):
    GLOBAL_RANDOM = "global_random"
    REGION_CLUSTERED = "region_clustered"
    HYBRID = "hybrid"
    REAL_CITIES = "real_cities"


_DIST_CODES = {Distribution.GLOBAL_RANDOM: "gr", Distribution.REGION_CLUSTERED: "rc",
               Distribution.HYBRID: "hy", Distribution.REAL_CITIES: "ci"}
_PLATFORM_CODES = {Platform.AGILE: "ag", Platform.NON_AGILE: "na"}


@dataclass(frozen=True)
class ScenarioTemplate:
    """One structural point of the scenario grid."""

    id: str
    family: str                      # standard | capacity | agility | constellation | realistic
    platform: Platform
    horizon_s: float
    sat_count: int
    task_count: int
    distribution: Distribution
    walker: Optional[tuple[int, int]] = None   # (planes, per_plane); None = real set
    capacity_pattern: str = "standard"
    agility_profile: str = "standard"


def _rng(*parts) -> np.random.Generator:
    """Deterministic generator derived from string/int stream labels."""
    entropy = [MASTER_SEED]
    for p in parts:
        entropy.append(zlib.crc32(str(p).encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(entropy))


# ---------------------------------------------------------------------------
# Constellations
# ---------------------------------------------------------------------------

def _attach_platform(sat: SatelliteSpec, platform: Platform,
                     agility_profile: str) -> SatelliteSpec:
    env = (AttitudeEnvelope.agile() if platform is Platform.AGILE
           else AttitudeEnvelope.non_agile())
    return replace(sat, envelope=env, agility_profile=agility_profile)


def real_satellites(count: int, platform: Platform = Platform.AGILE,
                    agility_profile: str = "standard") -> list[SatelliteSpec]:
    """The first ``count`` rows of the embedded real-satellite table."""
    if not 1 <= count <= len(REAL_SATELLITES):
        raise ValueError(f"real constellation supports 1..{len(REAL_SATELLITES)} "
                         f"satellites, requested {count}")
    sats = []
    for name, a, e, inc, raan, argp, nu in REAL_SATELLITES[:count]:
        el = OrbitalElements(a, e, inc, raan, argp, nu, epoch=REFERENCE_EPOCH)
        sats.append(_attach_platform(
            SatelliteSpec(name, el, AttitudeEnvelope.agile()), platform,
            agility_profile))
    return sats


def build_walker(total: int, planes: int, per_plane: int,
                 seed_elements: OrbitalElements = SEED_ORBIT,
                 platform: Platform = Platform.AGILE,
                 agility_profile: str = "standard") -> list[SatelliteSpec]:
    """Walker-Delta constellation sharing the seed orbit's a, e and i.

    RAAN spacing is 360/planes, in-plane mean-anomaly spacing 360/per_plane,
    with an inter-plane phasing offset of 360/total per plane (F = 1).
    """
    if planes * per_plane != total:
        raise ValueError(f"planes*per_plane = {planes * per_plane} != total {total}")
    e = seed_elements.eccentricity
    m0 = mean_from_true_anomaly(math.radians(seed_elements.true_anomaly_deg), e)
    width = len(str(total))
    sats = []
    k = 0
    for p in range(planes):
        raan = (seed_elements.raan_deg + p * 360.0 / planes) % 360.0
        for j in range(per_plane):
            m = m0 + math.radians(j * 360.0 / per_plane + p * 360.0 / total)
            nu = math.degrees(true_from_mean_anomaly(m, e)) % 360.0
            el = replace(seed_elements, raan_deg=raan, true_anomaly_deg=nu)
            sats.append(_attach_platform(
                SatelliteSpec(f"W{k:0{width}d}", el, AttitudeEnvelope.agile()),
                platform, agility_profile))
            k += 1
    return sats


# ---------------------------------------------------------------------------
# Target pools
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetPool:
    distribution: Distribution
    points: np.ndarray            # (N, 2) of (lat_deg, lon_deg)
    subset_size: int
    n_subsets: int = 10

    def subset(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_subsets:
            raise ValueError(f"subset index {index} out of range 0..{self.n_subsets - 1}")
        lo = index * self.subset_size
        return self.points[lo:lo + self.subset_size]


def _box_area_weight(box: tuple[float, float, float, float]) -> float:
    lat0, lat1, lon0, lon1 = box
    return (lon1 - lon0) * (math.sin(math.radians(lat1)) - math.sin(math.radians(lat0)))


def _sample_in_box(rng: np.random.Generator,
                   box: tuple[float, float, float, float]) -> tuple[float, float]:
    lat0, lat1, lon0, lon1 = box
    s0, s1 = math.sin(math.radians(lat0)), math.sin(math.radians(lat1))
    lat = math.degrees(math.asin(rng.uniform(s0, s1)))
    lon = rng.uniform(lon0, lon1)
    return (lat, lon)


def point_on_land(lat: float, lon: float) -> bool:
    return any(b[0] <= lat <= b[1] and b[2] <= lon <= b[3] for b in LAND_BOXES)


def point_in_region(lat: float, lon: float) -> bool:
    return any(b[0] <= lat <= b[1] and b[2] <= lon <= b[3] for b in REGIONS.values())


def _sample_global(rng: np.random.Generator) -> tuple[float, float]:
    weights = np.array([_box_area_weight(b) for b in LAND_BOXES])
    weights = weights / weights.sum()
    idx = rng.choice(len(LAND_BOXES), p=weights)
    return _sample_in_box(rng, LAND_BOXES[idx])


def _sample_clustered(rng: np.random.Generator) -> tuple[float, float]:
    names = sorted(REGIONS)
    name = names[rng.integers(len(names))]
    box = REGIONS[name]
    clusters = _REGION_CLUSTERS[name]
    clat, clon = clusters[rng.integers(len(clusters))]
    lat = float(np.clip(clat + rng.normal(0.0, 4.0), box[0], box[1]))
    lon = float(np.clip(clon + rng.normal(0.0, 6.0), box[2], box[3]))
    return (lat, lon)


@lru_cache(maxsize=None)
def _load_cities() -> tuple[tuple[str, float, float], ...]:
    ref = importlib.resources.files("eossched.data").joinpath("cities.csv")
    rows = []
    with ref.open("r", encoding="utf-8") as fh:
        for row in csv.reader(line for line in fh if not line.startswith("#")):
            rows.append((row[0], float(row[1]), float(row[2])))
    return tuple(rows)


def build_target_pool(distribution: Distribution,
                      master_seed: int = MASTER_SEED) -> TargetPool:
    """10,000 candidate locations in 10 disjoint subsets (cities: 1,000 in 10)."""
    if distribution is Distribution.REAL_CITIES:
        cities = _load_cities()
        order = np.random.default_rng(
            np.random.SeedSequence([master_seed, zlib.crc32(b"real_cities")])
        ).permutation(len(cities))
        pts = np.array([[cities[i][1], cities[i][2]] for i in order])
        return TargetPool(distribution, pts, subset_size=100)

    subset_size = 1000
    points = np.empty((10 * subset_size, 2))
    for sub in range(10):
        rng = np.random.default_rng(np.random.SeedSequence(
            [master_seed, zlib.crc32(distribution.value.encode()), sub]))
        for k in range(subset_size):
            if distribution is Distribution.GLOBAL_RANDOM:
                lat, lon = _sample_global(rng)
            elif distribution is Distribution.REGION_CLUSTERED:
                lat, lon = _sample_clustered(rng)
            elif distribution is Distribution.HYBRID:
                # alternate so every prefix of a subset stays a 50/50 mix
                lat, lon = (_sample_global(rng) if k % 2 == 0
                            else _sample_clustered(rng))
            else:
                raise ValueError(f"unsupported distribution {distribution}")
            points[sub * subset_size + k] = (lat, lon)
    return TargetPool(distribution, points, subset_size=subset_size)


@lru_cache(maxsize=8)
def _pool_cached(distribution: Distribution) -> TargetPool:
    return build_target_pool(distribution)


def assign_attributes(targets: Sequence[tuple[float, float]],
                      rng: np.random.Generator,
                      id_prefix: str = "T") -> list[TaskSpec]:
    """Draw priority/profit (1..10) and duration (5..15 s) for each target."""
    width = max(4, len(str(len(targets))))
    tasks = []
    for i, (lat, lon) in enumerate(targets):
        priority = int(rng.integers(1, 11))
        profit = int(rng.integers(1, 11))
        duration = int(rng.integers(5, 16))
        tasks.append(TaskSpec(f"{id_prefix}{i:0{width}d}", float(lat), float(lon),
                              priority, profit, duration))
    return tasks


# ---------------------------------------------------------------------------
# Scenario enumeration
# ---------------------------------------------------------------------------

def _horizon_code(horizon_s: float) -> str:
    return f"h{int(round(horizon_s / 3600.0)):03d}"


def _std_id(platform, dist, horizon_s, sats, tasks) -> str:
    return (f"std-{_PLATFORM_CODES[platform]}-{_DIST_CODES[dist]}-"
            f"{_horizon_code(horizon_s)}-s{sats:04d}-t{tasks:05d}")


def enumerate_standard() -> list[ScenarioTemplate]:
    """The full standard grid: load combos x horizons x distributions x platforms."""
    out = []
    for platform in (Platform.AGILE, Platform.NON_AGILE):
        for dist in (Distribution.GLOBAL_RANDOM, Distribution.REGION_CLUSTERED,
                     Distribution.HYBRID):
            for days in STANDARD_HORIZONS_DAYS:
                horizon = days * DAY_S
                for sats, loads in MISSION_LOADS:
                    walker = WALKER_DEFAULTS.get(sats)
                    for tasks in loads:
                        out.append(ScenarioTemplate(
                            id=_std_id(platform, dist, horizon, sats, tasks),
                            family="standard", platform=platform,
                            horizon_s=horizon, sat_count=sats, task_count=tasks,
                            distribution=dist, walker=walker))
    return out


def enumerate_specific() -> list[ScenarioTemplate]:
    """Capacity, manoeuvrability, constellation and realistic families."""
    out: list[ScenarioTemplate] = []
    dists = (Distribution.GLOBAL_RANDOM, Distribution.REGION_CLUSTERED,
             Distribution.HYBRID)

    for platform in (Platform.AGILE, Platform.NON_AGILE):
        for dist in dists:
            for sats, tasks in CAPACITY_BASELINES:
                for pattern in CAPACITY_PATTERNS:
                    out.append(ScenarioTemplate(
                        id=(f"cap-{_PLATFORM_CODES[platform]}-{_DIST_CODES[dist]}-"
                            f"s{sats:04d}-t{tasks:05d}-{pattern}"),
                        family="capacity", platform=platform, horizon_s=DAY_S,
                        sat_count=sats, task_count=tasks, distribution=dist,
                        walker=WALKER_DEFAULTS.get(sats),
                        capacity_pattern=pattern))

    for dist in dists:
        for sats, tasks in CAPACITY_BASELINES:
            for profile in AGILITY_VARIANTS:
                out.append(ScenarioTemplate(
                    id=f"agi-ag-{_DIST_CODES[dist]}-s{sats:04d}-t{tasks:05d}-{profile}",
                    family="agility", platform=Platform.AGILE, horizon_s=DAY_S,
                    sat_count=sats, task_count=tasks, distribution=dist,
                    walker=WALKER_DEFAULTS.get(sats), agility_profile=profile))

    for platform in (Platform.AGILE, Platform.NON_AGILE):
        for dist in dists:
            for sats, loads in CONSTELLATION_LOADS:
                for tasks in loads:
                    for variant, layout in sorted(WALKER_VARIANTS[sats].items()):
                        out.append(ScenarioTemplate(
                            id=(f"con-{_PLATFORM_CODES[platform]}-{_DIST_CODES[dist]}-"
                                f"s{sats:04d}-t{tasks:05d}-{variant}"),
                            family="constellation", platform=platform,
                            horizon_s=DAY_S, sat_count=sats, task_count=tasks,
                            distribution=dist, walker=layout))

    for platform in (Platform.AGILE, Platform.NON_AGILE):
        for sats in REALISTIC_SIZES:
            out.append(ScenarioTemplate(
                id=f"real-{_PLATFORM_CODES[platform]}-ci-s{sats:04d}-t{REALISTIC_TASKS:05d}",
                family="realistic", platform=platform, horizon_s=DAY_S,
                sat_count=sats, task_count=REALISTIC_TASKS,
                distribution=Distribution.REAL_CITIES))
    return out


def all_scenarios() -> list[ScenarioTemplate]:
    return enumerate_standard() + enumerate_specific()


@lru_cache(maxsize=1)
def _scenario_index() -> dict[str, ScenarioTemplate]:
    return {t.id: t for t in all_scenarios()}


def scenario_by_id(scenario_id: str) -> ScenarioTemplate:
    index = _scenario_index()
    if scenario_id not in index:
        raise KeyError(f"unknown scenario id '{scenario_id}'")
    return index[scenario_id]


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------

def _capacity_counts(n: int, shares: tuple[float, float, float]) -> tuple[int, int, int]:
    """Largest-remainder split of n satellites into (high, standard, low)."""
    raw = [s * n for s in shares]
    counts = [int(math.floor(x)) for x in raw]
    remainders = [x - c for x, c in zip(raw, counts)]
    order = sorted(range(3), key=lambda i: (-remainders[i], i))
    i = 0
    while sum(counts) < n:
        counts[order[i % 3]] += 1
        i += 1
    return tuple(counts)  # type: ignore[return-value]


def apply_capacity_pattern(satellites: list[SatelliteSpec],
                           pattern: str) -> list[SatelliteSpec]:
    if pattern == "standard":
        return satellites
    if pattern in CAPACITY_SCALES:
        factor = CAPACITY_SCALES[pattern]
        return [replace(s, capacities=ResourceCapacities(
            s.capacities.energy_per_orbit * factor,
            s.capacities.storage_per_orbit * factor)) for s in satellites]
    if pattern in MIXED_CAPACITY_SHARES:
        n_high, n_std, n_low = _capacity_counts(len(satellites),
                                                MIXED_CAPACITY_SHARES[pattern])
        out = []
        for i, s in enumerate(satellites):
            factor = 1.5 if i < n_high else (1.0 if i < n_high + n_std else 0.5)
            out.append(replace(s, capacities=ResourceCapacities(
                s.capacities.energy_per_orbit * factor,
                s.capacities.storage_per_orbit * factor)))
        return out
    raise ValueError(f"unknown capacity pattern '{pattern}'")


def default_window_step_s(platform: Platform) -> float:
    # Non-agile passes last only a few seconds; a 10 s grid would skip most
    # of them, so nadir-bound platforms sample finer.
    return 10.0 if platform is Platform.AGILE else 2.0


def default_slot_step_s(task_count: int) -> float:
    return 1.0 if task_count <= 1000 else 5.0


def build_constellation(template: ScenarioTemplate) -> list[SatelliteSpec]:
    if template.walker is not None:
        planes, per_plane = template.walker
        sats = build_walker(template.sat_count, planes, per_plane,
                            platform=template.platform,
                            agility_profile=template.agility_profile)
    else:
        sats = real_satellites(template.sat_count, template.platform,
                               template.agility_profile)
    return apply_capacity_pattern(sats, template.capacity_pattern)


def _opportunities_for(windows: Sequence[VisibleWindow],
                       durations: dict[str, int],
                       slot_step_s: float) -> tuple[AvailableOpportunity, ...]:
    opps: list[AvailableOpportunity] = []
    for idx, win in enumerate(windows):
        opps.extend(derive_opportunities(win, durations[win.task_id],
                                         slot_step_s, window_index=idx))
    return tuple(opps)


def generate_instance(template: ScenarioTemplate, seed_index: int,
                      window_step_s: Optional[float] = None,
                      slot_step_s: Optional[float] = None) -> Instance:
    """One concrete instance: subset ``seed_index`` targets, fresh attributes,
    geometry-driven windows and opportunities; deterministic throughout."""
    if not 0 <= seed_index < SEEDS_PER_SCENARIO:
        raise ValueError(f"seed_index must be 0..{SEEDS_PER_SCENARIO - 1}")
    pool = _pool_cached(template.distribution)
    subset = pool.subset(seed_index)
    # loads beyond the subset size cycle through the same subset, so the
    # spatial pattern stays fixed while the demand grows
    locations = [tuple(subset[k % len(subset)]) for k in range(template.task_count)]
    # the demand side is a pure function of (distribution, seed, task index):
    # raising the load keeps earlier tasks as a prefix, and capacity /
    # manoeuvrability / constellation variants compare against the exact
    # same task set as their baseline scenario
    tasks = assign_attributes(locations,
                              _rng(template.distribution.value, "tasks", seed_index))

    satellites = build_constellation(template)
    step = window_step_s if window_step_s is not None else default_window_step_s(template.platform)
    slot = slot_step_s if slot_step_s is not None else default_slot_step_s(template.task_count)
    try:
        windows = tuple(compute_all_windows(satellites, tasks, template.horizon_s, step))
    except Exception as exc:
        raise RuntimeError(
            f"window generation failed for scenario {template.id} "
            f"seed {seed_index}: {exc}") from exc
    durations = {t.id: t.duration_s for t in tasks}
    opportunities = _opportunities_for(windows, durations, slot)

    return Instance(
        id=f"{template.id}--i{seed_index:02d}",
        horizon_s=template.horizon_s,
        platform=template.platform,
        satellites=tuple(satellites),
        tasks=tuple(tasks),
        visible_windows=windows,
        opportunities=opportunities,
        provenance=Provenance(template.id, seed_index),
        epoch=REFERENCE_EPOCH,
    )


# ---------------------------------------------------------------------------
# Training-instance sub-sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubsampleRanges:
    satellites: tuple[int, int] = (1, 1000)
    tasks: tuple[int, int] = (10, 10000)
    horizon_s: tuple[float, float] = (3600.0, 168 * 3600.0)


def _task_span(instance: Instance, task_id: str) -> tuple[float, float]:
    """Normalised (first window start, last window end) of a task; the full
    horizon when the task has no window."""
    starts = [w.start_s for w in instance.visible_windows if w.task_id == task_id]
    ends = [w.end_s for w in instance.visible_windows if w.task_id == task_id]
    if not starts:
        return (0.0, 1.0)
    return (min(starts) / instance.horizon_s, max(ends) / instance.horizon_s)


def _clip_window(win: VisibleWindow, lo: float, hi: float,
                 duration_s: float) -> Optional[VisibleWindow]:
    start = max(win.start_s, lo)
    end = min(win.end_s, hi)
    if end - start < duration_s:
        return None
    track = None
    if win.track is not None:
        track = tuple(row for row in win.track if start <= row[0] <= end)
        if not track:
            return None
    return replace(win, start_s=start, end_s=end, track=track)


def subsample_instance(library: Sequence[Instance],
                       ranges: SubsampleRanges = SubsampleRanges(),
                       seed: int = 0,
                       max_attempts: int = 2000,
                       feasibility_threshold: float = 0.5,
                       window_step_s: Optional[float] = None,
                       slot_step_s: Optional[float] = None) -> Instance:
    """Recombine satellites and tasks from library instances into a fresh one.

    Each attempt samples a target scale, filters parents that are at least
    that large, sub-samples without replacement, re-maps each task's
    normalised window span onto the new horizon through a random shift with
    clipping, rebuilds access windows, and accepts the draw when the share
    of tasks with at least one opportunity reaches the threshold and the
    digest differs from every library instance.  After ``max_attempts``
    failures the largest library instance is returned, flagged as fallback.
    """
    if not library:
        raise ValueError("library must not be empty")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([MASTER_SEED, seed, 0xA17]))
    library_digests = {instance_digest(inst) for inst in library}

    for attempt in range(max_attempts):
        horizon = float(rng.uniform(*ranges.horizon_s))
        n_sats = int(rng.integers(ranges.satellites[0], ranges.satellites[1] + 1))
        n_tasks = int(rng.integers(ranges.tasks[0], ranges.tasks[1] + 1))
        valid = [inst for inst in library
                 if len(inst.satellites) >= n_sats and len(inst.tasks) >= n_tasks
                 and inst.horizon_s >= horizon]
        if not valid:
            continue
        parent = valid[int(rng.integers(len(valid)))]
        sat_idx = sorted(rng.choice(len(parent.satellites), n_sats, replace=False))
        task_idx = sorted(rng.choice(len(parent.tasks), n_tasks, replace=False))
        satellites = [parent.satellites[i] for i in sat_idx]
        shift = float(rng.uniform(0.0, horizon))

        tasks: list[TaskSpec] = []
        admissible: dict[str, tuple[float, float]] = {}
        for i in task_idx:
            task = parent.tasks[i]
            r_hat, d_hat = _task_span(parent, task.id)
            lo = min(max(r_hat * horizon + shift, 0.0), horizon)
            hi = min(max(d_hat * horizon + shift, 0.0), horizon)
            if hi < lo + task.duration_s:
                continue
            tasks.append(task)
            admissible[task.id] = (lo, hi)
        if len(tasks) < n_tasks:
            continue

        step = (window_step_s if window_step_s is not None
                else default_window_step_s(parent.platform))
        slot = (slot_step_s if slot_step_s is not None
                else default_slot_step_s(n_tasks))
        durations = {t.id: t.duration_s for t in tasks}
        windows = []
        for win in compute_all_windows(satellites, tasks, horizon, step):
            lo, hi = admissible[win.task_id]
            clipped = _clip_window(win, lo, hi, durations[win.task_id])
            if clipped is not None:
                windows.append(clipped)
        opportunities = _opportunities_for(windows, durations, slot)

        with_opps = {o.task_id for o in opportunities}
        ratio = len(with_opps) / len(tasks) if tasks else 0.0
        if ratio < feasibility_threshold:
            continue
        candidate = Instance(
            id=f"subsample-{seed}-a{attempt:04d}",
            horizon_s=horizon, platform=parent.platform,
            satellites=tuple(satellites), tasks=tuple(tasks),
            visible_windows=tuple(windows), opportunities=opportunities,
            provenance=Provenance(f"subsample:{parent.provenance.scenario_id}", seed),
            epoch=parent.epoch,
            transition_override_s=parent.transition_override_s,
        )
        if instance_digest(candidate) in library_digests:
            continue
        return candidate

    biggest = max(library, key=lambda inst: (len(inst.tasks), inst.id))
    return replace(biggest, id=f"subsample-{seed}-fallback",
                   provenance=replace(biggest.provenance, fallback=True))

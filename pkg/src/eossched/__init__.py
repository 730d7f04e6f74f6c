"""Earth-observation satellite scheduling benchmark toolkit.

Generates parametrised scheduling scenarios and instances, characterises
their structural difficulty before optimisation, solves them with exact,
greedy and meta-heuristic baselines, validates schedules against a shared
feasibility model and scores them under a five-metric protocol.
"""

from .core import (
    Assignment,
    AttitudeEnvelope,
    AvailableOpportunity,
    Instance,
    OrbitalElements,
    PayloadRates,
    Platform,
    Provenance,
    ResourceCapacities,
    SatelliteSpec,
    Schedule,
    TaskSpec,
    VisibleWindow,
    deserialize_instance,
    deserialize_schedule,
    instance_digest,
    serialize_instance,
    serialize_schedule,
    validate_instance,
)

__version__ = "0.1.0"

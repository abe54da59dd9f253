"""Two-phase CO2 accounting for computer-vision models.

Search-phase emissions come from device power, GPU-hours and datacenter PUE;
evaluation-phase emissions come from model FLOPs, device watt-per-FLOP/s
ratios and the training schedule, accumulated over the number of times the
community retrains an architecture.
"""

from carbon_ledger.emissions import (
    Co2Estimate,
    EmissionFactors,
    EnergyEstimate,
    TrainingSchedule,
    amortized_total,
    breakeven_trainings,
    energy_to_co2,
    eval_energy,
    lifetime_co2,
    per_training_co2,
    search_energy,
    trainings_from_citations,
)
from carbon_ledger.equivalency import EquivalencyFactors, co2_to_cars, co2_to_homes
from carbon_ledger.errors import (
    CarbonLedgerError,
    DuplicateName,
    InvalidRange,
    MissingField,
    NegativeDuration,
    NonPositiveFlops,
    ParseError,
    UnknownHardware,
    ValidationError,
)
from carbon_ledger.hardware_db import (
    HardwareDb,
    HardwareSpec,
    builtin_db,
    load_overrides,
    lookup,
    resolve_with_defaults,
    watt_per_flops,
)
from carbon_ledger.registry import ModelRecord, Registry, ingest

__version__ = "0.1.0"

__all__ = [
    "Co2Estimate",
    "EmissionFactors",
    "EnergyEstimate",
    "EquivalencyFactors",
    "HardwareDb",
    "HardwareSpec",
    "ModelRecord",
    "Registry",
    "TrainingSchedule",
    "CarbonLedgerError",
    "DuplicateName",
    "InvalidRange",
    "MissingField",
    "NegativeDuration",
    "NonPositiveFlops",
    "ParseError",
    "UnknownHardware",
    "ValidationError",
    "amortized_total",
    "breakeven_trainings",
    "builtin_db",
    "co2_to_cars",
    "co2_to_homes",
    "energy_to_co2",
    "eval_energy",
    "ingest",
    "lifetime_co2",
    "load_overrides",
    "lookup",
    "per_training_co2",
    "resolve_with_defaults",
    "search_energy",
    "trainings_from_citations",
    "watt_per_flops",
]

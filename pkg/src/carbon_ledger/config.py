"""Run configuration: a flat TOML key/value file plus command-line overrides.

Recognised keys::

    pue = 1.59
    ef_kg_per_kwh = 0.707
    tonnes_per_car_year = 4.6
    tonnes_per_home_year = 5.9
    trainings_per_citation = 50
    apply_pue_to_eval = false
    hardware_overrides = "my_hardware.json"   # relative to the config file
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from carbon_ledger.emissions import DEFAULT_TRAININGS_PER_CITATION, EmissionFactors
from carbon_ledger.equivalency import EquivalencyFactors
from carbon_ledger.errors import ParseError, ValidationError
from carbon_ledger.hardware_db import HardwareDb, builtin_db, load_overrides

ENV_VAR = "CARBON_LEDGER_CONFIG"

_FLOAT_KEYS = ("pue", "ef_kg_per_kwh", "tonnes_per_car_year", "tonnes_per_home_year")
KEYS = _FLOAT_KEYS + ("trainings_per_citation", "apply_pue_to_eval", "hardware_overrides")


@dataclass(frozen=True)
class Config:
    factors: EmissionFactors = field(default_factory=EmissionFactors)
    eq_factors: EquivalencyFactors = field(default_factory=EquivalencyFactors)
    trainings_per_citation: int = DEFAULT_TRAININGS_PER_CITATION
    hardware_overrides: Path | None = None

    def __post_init__(self) -> None:
        tpc = self.trainings_per_citation
        if isinstance(tpc, bool) or not isinstance(tpc, int) or tpc < 0:
            raise ValidationError([(None, "trainings_per_citation", f"must be a non-negative integer, got {tpc!r}")])

    @property
    def apply_pue_to_eval(self) -> bool:
        return self.factors.apply_pue_to_eval

    def hardware_db(self) -> HardwareDb:
        db = builtin_db()
        if self.hardware_overrides is not None:
            db = load_overrides(db, self.hardware_overrides)
        return db

    def as_dict(self) -> dict[str, Any]:
        return {
            "pue": self.factors.pue,
            "ef_kg_per_kwh": self.factors.ef_kg_per_kwh,
            "apply_pue_to_eval": self.factors.apply_pue_to_eval,
            "tonnes_per_car_year": self.eq_factors.tonnes_per_car_year,
            "tonnes_per_home_year": self.eq_factors.tonnes_per_home_year,
            "trainings_per_citation": self.trainings_per_citation,
            "hardware_overrides": None if self.hardware_overrides is None else self.hardware_overrides.name,
        }


def _number(key: str, v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError([(None, key, f"expected a number, got {v!r}")])
    return float(v)


def from_mapping(values: dict[str, Any], base: Config | None = None, root: Path | None = None) -> Config:
    """Apply ``values`` (keys from ``KEYS``; ``None`` means keep) on top of ``base``."""
    cfg = base or Config()
    unknown = sorted(set(values) - set(KEYS))
    if unknown:
        raise ValidationError([(None, k, "unknown configuration key") for k in unknown])
    vals = {k: v for k, v in values.items() if v is not None}

    f = cfg.factors
    pue = _number("pue", vals["pue"]) if "pue" in vals else f.pue
    ef = _number("ef_kg_per_kwh", vals["ef_kg_per_kwh"]) if "ef_kg_per_kwh" in vals else f.ef_kg_per_kwh
    apply = vals.get("apply_pue_to_eval", f.apply_pue_to_eval)
    if not isinstance(apply, bool):
        raise ValidationError([(None, "apply_pue_to_eval", f"expected true or false, got {apply!r}")])
    eq = cfg.eq_factors
    car = _number("tonnes_per_car_year", vals["tonnes_per_car_year"]) if "tonnes_per_car_year" in vals else eq.tonnes_per_car_year
    home = _number("tonnes_per_home_year", vals["tonnes_per_home_year"]) if "tonnes_per_home_year" in vals else eq.tonnes_per_home_year
    hw = cfg.hardware_overrides
    if "hardware_overrides" in vals:
        hw = Path(vals["hardware_overrides"])
        if root is not None and not hw.is_absolute():
            hw = root / hw
    return replace(
        cfg,
        factors=EmissionFactors(pue, ef, apply),
        eq_factors=EquivalencyFactors(car, home),
        trainings_per_citation=vals.get("trainings_per_citation", cfg.trainings_per_citation),
        hardware_overrides=hw,
    )


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return from_mapping(data, root=path.parent)


def config_path(explicit: str | None) -> Path | None:
    """Explicit ``--config`` path, else ``$CARBON_LEDGER_CONFIG``, else none."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else None

"""CO2 mass to cars-driven-for-a-year and homes-powered-for-a-year."""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from carbon_ledger.emissions import Co2Estimate
from carbon_ledger.errors import ValidationError

# (CO2 tonnes, cars driven, homes powered) for ResNet, VGG and GoogLeNet.
# The default factors are the mean tonnes-per-unit across these rows.
LIFETIME_EQUIVALENTS_TABLE: dict[str, tuple[float, float, float]] = {
    "ResNet": (326.6, 70.6, 55.3),
    "VGG": (181.7, 39.8, 30.8),
    "GoogLeNet": (65.1, 14.1, 11.0),
}

DEFAULT_TONNES_PER_CAR_YEAR = fmean(t / cars for t, cars, _ in LIFETIME_EQUIVALENTS_TABLE.values())
DEFAULT_TONNES_PER_HOME_YEAR = fmean(t / homes for t, _, homes in LIFETIME_EQUIVALENTS_TABLE.values())


@dataclass(frozen=True)
class EquivalencyFactors:
    tonnes_per_car_year: float = DEFAULT_TONNES_PER_CAR_YEAR
    tonnes_per_home_year: float = DEFAULT_TONNES_PER_HOME_YEAR

    def __post_init__(self) -> None:
        for name in ("tonnes_per_car_year", "tonnes_per_home_year"):
            value = getattr(self, name)
            if not value > 0:
                raise ValidationError([(None, name, f"{name} must be > 0, got {value}")])


def co2_to_cars(co2: Co2Estimate, factors: EquivalencyFactors = EquivalencyFactors()) -> float:
    return (co2.kg / 1000.0) / factors.tonnes_per_car_year


def co2_to_homes(co2: Co2Estimate, factors: EquivalencyFactors = EquivalencyFactors()) -> float:
    return (co2.kg / 1000.0) / factors.tonnes_per_home_year

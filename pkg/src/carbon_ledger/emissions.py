"""Search-phase and evaluation-phase energy/CO2 arithmetic.

Search phase::

    energy [Wh] = pue * gpu_hours * (gpu_watts + cpu_watts)

Evaluation phase (one training run)::

    energy [Wh] = flops * (gpu_w_per_flops + cpu_w_per_flops) * gpu_hours

Both convert to CO2 with ``kg = kWh * ef_kg_per_kwh``. The evaluation
formula has no PUE term unless ``EmissionFactors.apply_pue_to_eval`` is set,
and its result is a FLOPs-weighted energy proxy rather than metered energy.
DRAM is not counted.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from carbon_ledger.errors import NegativeDuration, NonPositiveFlops, ValidationError
from carbon_ledger.hardware_db import HardwareSpec, watt_per_flops

DEFAULT_PUE = 1.59
# US national average, 0.707e-3 t/kWh
DEFAULT_EF_KG_PER_KWH = 0.707
DEFAULT_TRAININGS_PER_CITATION = 50

_FLOAT_EXACT_INT = 2**53


@dataclass(frozen=True)
class EmissionFactors:
    pue: float = DEFAULT_PUE
    ef_kg_per_kwh: float = DEFAULT_EF_KG_PER_KWH
    apply_pue_to_eval: bool = False

    def __post_init__(self) -> None:
        if not self.pue >= 1.0:
            raise ValidationError([(None, "pue", f"PUE must be >= 1, got {self.pue}")])
        if not self.ef_kg_per_kwh >= 0.0:
            raise ValidationError([(None, "ef_kg_per_kwh", f"emission factor must be >= 0, got {self.ef_kg_per_kwh}")])


@dataclass(frozen=True)
class EnergyEstimate:
    wh: float

    def __post_init__(self) -> None:
        if not self.wh >= 0.0:
            raise ValidationError([(None, "wh", f"energy must be >= 0 Wh, got {self.wh}")])

    @property
    def kwh(self) -> float:
        return self.wh / 1000.0


@dataclass(frozen=True)
class Co2Estimate:
    kg: float

    def __post_init__(self) -> None:
        if not self.kg >= 0.0:
            raise ValidationError([(None, "kg", f"CO2 must be >= 0 kg, got {self.kg}")])

    @property
    def tonnes(self) -> float:
        return self.kg / 1000.0


@dataclass(frozen=True)
class TrainingSchedule:
    epochs: int
    minutes_per_epoch: float

    def __post_init__(self) -> None:
        if not self.epochs > 0:
            raise ValidationError([(None, "epochs", f"epochs must be > 0, got {self.epochs}")])
        if not self.minutes_per_epoch > 0:
            raise ValidationError(
                [(None, "min_per_epoch", f"minutes per epoch must be > 0, got {self.minutes_per_epoch}")]
            )

    def gpu_hours(self) -> float:
        return self.epochs * self.minutes_per_epoch / 60.0


HAND_CRAFTED_SCHEDULE = TrainingSchedule(250, 40.0)
NAS_SCHEDULE = TrainingSchedule(250, 60.0)


def search_energy(gpu_hours: float, p_g: float, p_c: float, factors: EmissionFactors = EmissionFactors()) -> EnergyEstimate:
    """Facility energy of a search run: PUE x GPU-hours x (GPU W + CPU W)."""
    if gpu_hours < 0:
        raise NegativeDuration(f"gpu_hours must be >= 0, got {gpu_hours}")
    if not (p_g > 0 and p_c > 0):
        raise ValidationError([(None, "power_draw", f"device power must be > 0 W, got gpu={p_g}, cpu={p_c}")])
    return EnergyEstimate(factors.pue * gpu_hours * (p_g + p_c))


def energy_to_co2(e: EnergyEstimate, factors: EmissionFactors = EmissionFactors()) -> Co2Estimate:
    return Co2Estimate((e.wh / 1000.0) * factors.ef_kg_per_kwh)


def eval_energy(f: float, omega_g: float, omega_c: float, gpu_hours: float) -> EnergyEstimate:
    """Evaluation-phase energy of one training run, ``f * (omega_g + omega_c) * gpu_hours``.

    ``f`` is the model's FLOPs per forward pass; the omegas are device watts
    per FLOP/s of peak throughput.
    """
    if not f > 0:
        raise NonPositiveFlops(f"flops must be > 0, got {f}")
    if gpu_hours < 0:
        raise NegativeDuration(f"gpu_hours must be >= 0, got {gpu_hours}")
    if omega_g < 0 or omega_c < 0:
        raise ValidationError([(None, "omega", f"watt-per-FLOPS ratios must be >= 0, got {omega_g}, {omega_c}")])
    return EnergyEstimate(f * (omega_g + omega_c) * gpu_hours)


def per_training_co2(
    f: float,
    gpu: HardwareSpec,
    cpu: HardwareSpec,
    schedule: TrainingSchedule,
    factors: EmissionFactors = EmissionFactors(),
) -> Co2Estimate:
    energy = eval_energy(f, watt_per_flops(gpu), watt_per_flops(cpu), schedule.gpu_hours())
    if factors.apply_pue_to_eval:
        energy = EnergyEstimate(energy.wh * factors.pue)
    return energy_to_co2(energy, factors)


def _check_count(name: str, n: int) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValidationError([(None, name, f"{name} must be an integer, got {n!r}")])
    n = int(n)
    if n < 0:
        raise ValidationError([(None, name, f"{name} must be >= 0, got {n}")])
    return n


def lifetime_co2(per_training: Co2Estimate, n_trainings: int) -> Co2Estimate:
    n = _check_count("n_trainings", n_trainings)
    return Co2Estimate(per_training.kg * n)


def trainings_from_citations(citations: int, trainings_per_citation: int = DEFAULT_TRAININGS_PER_CITATION) -> int:
    """Community trainings implied by a citation count (each citing paper retrains the model)."""
    return _check_count("citations", citations) * _check_count("trainings_per_citation", trainings_per_citation)


def amortized_total(search: Co2Estimate, per_training: Co2Estimate, n_trainings: int) -> Co2Estimate:
    """Search cost plus ``n_trainings`` evaluation runs."""
    n = _check_count("n_trainings", n_trainings)
    return Co2Estimate(search.kg + per_training.kg * n)


def breakeven_trainings(
    search_a: Co2Estimate, per_a: Co2Estimate, search_b: Co2Estimate, per_b: Co2Estimate
) -> int | None:
    """Smallest n >= 0 at which model A's amortized total is <= model B's.

    Returns ``None`` when A never catches up (A costs more to search and no
    less to train).
    """

    def a_wins(n: int) -> bool:
        return amortized_total(search_a, per_a, n).kg <= amortized_total(search_b, per_b, n).kg

    if a_wins(0):
        return 0
    if per_b.kg <= per_a.kg:
        return None
    # exact crossing point of the two lines
    n = math.ceil((Fraction(search_a.kg) - Fraction(search_b.kg)) / (Fraction(per_b.kg) - Fraction(per_a.kg)))
    if n > _FLOAT_EXACT_INT:
        return n
    # float rounding can move the boundary off the exact crossing; bracket and bisect
    n = max(n, 1)
    step = 1
    while not a_wins(n):
        n += step
        step *= 2
    lo, step = n - 1, 1
    while lo > 0 and a_wins(lo):
        lo = max(0, lo - step)
        step *= 2
    hi = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a_wins(mid):
            hi = mid
        else:
            lo = mid
    return hi

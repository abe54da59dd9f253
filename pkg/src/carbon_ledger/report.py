"""Report tables and figure-ready series built from a registry.

Three report kinds mirror the usual presentation of two-phase emissions:

* search scatter: search-phase CO2 against top-1 accuracy and GFLOPs,
* lifetime series: cumulative CO2 as the number of trainings grows,
* lifetime table: per-model lifetime CO2 from citation counts, with
  car-year and home-year equivalents.

Rows are always assembled in model-name order, so output depends only on the
registry's content and not on the order of its records.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from carbon_ledger.emissions import (
    DEFAULT_TRAININGS_PER_CITATION,
    Co2Estimate,
    EmissionFactors,
    amortized_total,
    lifetime_co2,
    trainings_from_citations,
)
from carbon_ledger.equivalency import EquivalencyFactors, co2_to_cars, co2_to_homes
from carbon_ledger.errors import InvalidRange
from carbon_ledger.hardware_db import HardwareDb
from carbon_ledger.registry import ModelRecord, Registry, per_training_estimate, search_phase_estimate, serialize

log = logging.getLogger(__name__)

FORMATS = ("csv", "json", "md")


@dataclass(frozen=True)
class ScatterRow:
    model_name: str
    top1: float | None
    gflops: float
    search_co2_kg: float


@dataclass(frozen=True)
class ReportRow:
    model_name: str
    search_co2_kg: float | None
    per_training_co2_kg: float
    lifetime_co2_kg: float | None
    n_trainings: int | None
    cars: float | None
    homes: float | None
    top1: float | None
    gflops: float


@dataclass(frozen=True)
class EquivalentsRow:
    model_name: str
    co2_t: float
    cars: float
    homes: float


@dataclass(frozen=True)
class SeriesPoint:
    n_trainings: int
    evaluation_co2_kg: float
    amortized_co2_kg: float

    @property
    def x(self) -> int:
        return self.n_trainings

    @property
    def y(self) -> float:
        return self.amortized_co2_kg


@dataclass(frozen=True)
class Series:
    label: str
    points: tuple[SeriesPoint, ...]


def search_scatter(
    reg: Registry | Iterable[ModelRecord], db: HardwareDb, factors: EmissionFactors = EmissionFactors()
) -> tuple[list[ScatterRow], list[str]]:
    """Search CO2 per record, plus the names of records skipped for lacking search GPU-hours."""
    rows, skipped = [], []
    for rec in sorted(reg, key=lambda r: r.name):
        if rec.search_gpu_hours is None:
            log.info("skipping %s: no search GPU-hours reported", rec.name)
            skipped.append(rec.name)
            continue
        co2 = search_phase_estimate(rec, db, factors)
        rows.append(ScatterRow(rec.name, rec.top1, rec.gflops, co2.kg))
    return rows, skipped


def grid(n_max: int, step: int) -> list[int]:
    if not (isinstance(step, int) and isinstance(n_max, int)) or step <= 0 or n_max < step:
        raise InvalidRange(f"need integers with n_max >= step > 0, got n_max={n_max}, step={step}")
    xs = list(range(0, n_max + 1, step))
    if xs[-1] != n_max:
        xs.append(n_max)
    return xs


def lifetime_series(
    record: ModelRecord,
    db: HardwareDb,
    factors: EmissionFactors = EmissionFactors(),
    n_max: int = 1_000_000,
    step: int = 100_000,
) -> Series:
    """Cumulative CO2 over 0..n_max trainings.

    ``evaluation_co2_kg`` counts training runs only; ``amortized_co2_kg``
    adds the one-off search cost when the record reports search GPU-hours.
    """
    xs = grid(n_max, step)
    per = per_training_estimate(record, db, factors)
    search = search_phase_estimate(record, db, factors) if record.search_gpu_hours is not None else Co2Estimate(0.0)
    points = tuple(
        SeriesPoint(n, lifetime_co2(per, n).kg, amortized_total(search, per, n).kg) for n in xs
    )
    return Series(record.name, points)


def registry_series(
    reg: Registry | Iterable[ModelRecord],
    db: HardwareDb,
    factors: EmissionFactors = EmissionFactors(),
    n_max: int = 1_000_000,
    step: int = 100_000,
) -> list[Series]:
    return [lifetime_series(r, db, factors, n_max, step) for r in sorted(reg, key=lambda r: r.name)]


def lifetime_table(
    reg: Registry | Iterable[ModelRecord],
    db: HardwareDb,
    factors: EmissionFactors = EmissionFactors(),
    eq_factors: EquivalencyFactors = EquivalencyFactors(),
    trainings_per_citation: int = DEFAULT_TRAININGS_PER_CITATION,
    n_trainings: int | None = None,
) -> list[ReportRow]:
    """Lifetime CO2 per record.

    The number of trainings is ``citations * trainings_per_citation`` unless
    ``n_trainings`` is given, which then applies to every record. Records with
    unknown citations (and no override) keep their lifetime fields empty.
    """
    rows = []
    for rec in sorted(reg, key=lambda r: r.name):
        per = per_training_estimate(rec, db, factors)
        search = search_phase_estimate(rec, db, factors).kg if rec.search_gpu_hours is not None else None
        if n_trainings is not None:
            n = trainings_from_citations(n_trainings, 1)
        elif rec.citations is not None:
            n = trainings_from_citations(rec.citations, trainings_per_citation)
        else:
            n = None
        if n is None:
            life = cars = homes = None
        else:
            total = lifetime_co2(per, n)
            life, cars, homes = total.kg, co2_to_cars(total, eq_factors), co2_to_homes(total, eq_factors)
        rows.append(ReportRow(rec.name, search, per.kg, life, n, cars, homes, rec.top1, rec.gflops))
    return rows


def equivalents_table(
    totals: Sequence[tuple[str, Co2Estimate]], eq_factors: EquivalencyFactors = EquivalencyFactors()
) -> list[EquivalentsRow]:
    """Tonnes, car-years and home-years for named CO2 totals, in the given order."""
    return [
        EquivalentsRow(name, co2.tonnes, co2_to_cars(co2, eq_factors), co2_to_homes(co2, eq_factors))
        for name, co2 in totals
    ]


# -- rendering --------------------------------------------------------------


def format_sig(x: float, digits: int = 4) -> str:
    """Round to ``digits`` significant digits and print without an exponent."""
    if x == 0 or not math.isfinite(x):
        return "0" if x == 0 else str(x)
    exp = math.floor(math.log10(abs(x)))
    rounded = round(x, digits - 1 - exp)
    if rounded != 0:
        exp = math.floor(math.log10(abs(rounded)))
    decimals = max(0, digits - 1 - exp)
    return f"{rounded:.{decimals}f}"


_SIG_COLUMNS = ("cars", "homes", "watt_per_gflops")


def _human(col: str, v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if col.endswith(("_kg", "_t")) or col in _SIG_COLUMNS:
            return format_sig(v)
        return repr(v)
    return str(v)


def registry_digest(reg: Registry | Iterable[ModelRecord]) -> dict[str, Any]:
    """Order-independent identity of a registry's content."""
    records = sorted(reg, key=lambda r: r.name)
    digest = hashlib.sha256(serialize(records, "csv").encode("utf-8")).hexdigest()
    return {"records": len(records), "sha256": digest}


def _table(items: Sequence[Any]) -> tuple[str, list[str], list[dict[str, Any]]]:
    if items and isinstance(items[0], Series):
        cols = ["label", "n_trainings", "evaluation_co2_kg", "amortized_co2_kg"]
        rows = [
            {"label": s.label, **dataclasses.asdict(p)}
            for s in items
            for p in s.points
        ]
        return "series", cols, rows
    if items:
        cols = [f.name for f in dataclasses.fields(items[0])]
    else:
        cols = [f.name for f in dataclasses.fields(ReportRow)]
    return "table", cols, [dataclasses.asdict(r) for r in items]


def render(
    items: Sequence[Any] | Series,
    fmt: str = "csv",
    generated_from: dict[str, Any] | None = None,
    columns: Sequence[str] | None = None,
) -> bytes:
    """Serialize report rows or series as CSV, JSON or a markdown pipe table.

    Output is deterministic UTF-8 with LF endings. CSV and markdown print
    floats to 4 significant digits; JSON keeps full precision. ``columns``
    sets the header for an empty table (defaults to the lifetime-table columns).
    """
    if isinstance(items, Series):
        items = [items]
    items = list(items)
    kind, cols, rows = _table(items)
    if columns is not None and not items:
        cols = list(columns)

    if fmt == "json":
        body_key = "points" if kind == "series" else "rows"
        doc = {"kind": kind, "generated_from": generated_from, "columns": cols, body_key: rows}
        return (json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_human(c, row[c]) for c in cols])
        return buf.getvalue().encode("utf-8")
    if fmt in ("md", "markdown"):
        lines = ["| " + " | ".join(cols) + " |", "|" + "|".join("---" for _ in cols) + "|"]
        for row in rows:
            lines.append("| " + " | ".join(_human(c, row[c]) for c in cols) + " |")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unsupported report format: {fmt!r}")

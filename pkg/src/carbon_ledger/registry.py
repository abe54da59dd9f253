"""Model registry: ingestion, validation and export of per-model records.

CSV files need a header row with the columns in ``COLUMNS`` (``name``,
``family`` and ``gflops`` are mandatory; the rest may be omitted). An empty
cell means the value is unknown. JSON files are an array of objects using the
same keys, with ``null`` or ``""`` for unknown values. FLOPs are given in
GFLOPs and parameters in millions.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Iterator

from carbon_ledger.emissions import (
    HAND_CRAFTED_SCHEDULE,
    NAS_SCHEDULE,
    Co2Estimate,
    EmissionFactors,
    EnergyEstimate,
    TrainingSchedule,
    energy_to_co2,
    per_training_co2,
    search_energy,
)
from carbon_ledger.errors import DuplicateName, MissingField, ParseError, ValidationError
from carbon_ledger.hardware_db import HardwareDb, Resolution, resolve_with_defaults

log = logging.getLogger(__name__)

COLUMNS = (
    "name",
    "family",
    "top1",
    "params_m",
    "gflops",
    "search_gpu_hours",
    "gpu_id",
    "cpu_id",
    "citations",
    "epochs",
    "min_per_epoch",
)
REQUIRED_COLUMNS = ("name", "family", "gflops")


class Family(str, enum.Enum):
    NAS_SEARCHED = "nas_searched"
    HAND_CRAFTED = "hand_crafted"


@dataclass(frozen=True)
class ModelRecord:
    name: str
    family: Family
    gflops: float
    top1: float | None = None
    params_m: float | None = None
    search_gpu_hours: float | None = None
    gpu_id: str | None = None
    cpu_id: str | None = None
    citations: int | None = None
    schedule: TrainingSchedule | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family(self.family))
        problems = _record_problems(self)
        if problems:
            raise ValidationError([(None, f, m) for f, m in problems])

    @property
    def flops(self) -> float:
        """FLOPs per forward pass."""
        return self.gflops * 1e9

    @property
    def params(self) -> float | None:
        return None if self.params_m is None else self.params_m * 1e6


def _record_problems(r: ModelRecord) -> list[tuple[str, str]]:
    out = []
    if not r.name or not r.name.strip():
        out.append(("name", "name must be non-empty"))
    if not r.gflops > 0:
        out.append(("gflops", f"FLOPs must be > 0, got {r.gflops}"))
    if r.top1 is not None and not 0.0 <= r.top1 <= 100.0:
        out.append(("top1", f"top-1 accuracy must be within [0, 100], got {r.top1}"))
    if r.params_m is not None and not r.params_m >= 0:
        out.append(("params_m", f"parameter count must be >= 0, got {r.params_m}"))
    if r.search_gpu_hours is not None and not r.search_gpu_hours >= 0:
        out.append(("search_gpu_hours", f"search GPU-hours must be >= 0, got {r.search_gpu_hours}"))
    if r.citations is not None and not r.citations >= 0:
        out.append(("citations", f"citations must be >= 0, got {r.citations}"))
    return out


@dataclass(frozen=True)
class Provenance:
    source: str
    format: str
    ingested_at: str


@dataclass(frozen=True)
class Registry:
    records: tuple[ModelRecord, ...]
    provenance: Provenance | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[str] = set()
        for r in self.records:
            if r.name in seen:
                raise DuplicateName(r.name)
            seen.add(r.name)

    def __iter__(self) -> Iterator[ModelRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def get(self, name: str) -> ModelRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def sorted_records(self) -> list[ModelRecord]:
        return sorted(self.records, key=lambda r: r.name)


# -- parsing ----------------------------------------------------------------


def _blank(v: Any) -> bool:
    return v is None or (isinstance(v, str) and not v.strip())


def _to_float(v: Any) -> float:
    if isinstance(v, bool):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v.strip() if isinstance(v, str) else v)


def _to_int(v: Any) -> int:
    if isinstance(v, bool):
        raise ValueError(f"expected an integer, got {v!r}")
    if isinstance(v, str):
        v = v.strip()
        try:
            return int(v)
        except ValueError:
            pass
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


_CONVERTERS = {
    "top1": _to_float,
    "params_m": _to_float,
    "gflops": _to_float,
    "search_gpu_hours": _to_float,
    "citations": _to_int,
    "epochs": _to_int,
    "min_per_epoch": _to_float,
}


def record_from_mapping(raw: dict[str, Any], row: int | None = None) -> ModelRecord:
    """Build a record from file-level fields; problems are reported against ``row``."""
    problems: list[tuple[int | None, str | None, str]] = []
    values: dict[str, Any] = {}
    for col in COLUMNS:
        v = raw.get(col)
        if _blank(v):
            values[col] = None
            continue
        conv = _CONVERTERS.get(col)
        if conv is None:
            values[col] = v.strip() if isinstance(v, str) else str(v)
            continue
        try:
            values[col] = conv(v)
        except (TypeError, ValueError):
            problems.append((row, col, f"not a valid number: {v!r}"))
            values[col] = None

    for col in REQUIRED_COLUMNS:
        if values[col] is None and not any(p[1] == col for p in problems):
            problems.append((row, col, "required value is missing"))
    family = values["family"]
    if family is not None and family not in {f.value for f in Family}:
        problems.append((row, "family", f"family must be 'nas_searched' or 'hand_crafted', got {family!r}"))

    schedule = None
    epochs, mpe = values["epochs"], values["min_per_epoch"]
    if (epochs is None) != (mpe is None) and not any(p[1] in ("epochs", "min_per_epoch") for p in problems):
        problems.append((row, "epochs" if epochs is None else "min_per_epoch",
                         "epochs and min_per_epoch must be given together"))
    elif epochs is not None and mpe is not None:
        if epochs <= 0:
            problems.append((row, "epochs", f"epochs must be > 0, got {epochs}"))
        if not mpe > 0:
            problems.append((row, "min_per_epoch", f"minutes per epoch must be > 0, got {mpe}"))
        if epochs > 0 and mpe > 0:
            schedule = TrainingSchedule(epochs, mpe)

    if problems:
        raise ValidationError(problems)
    try:
        return ModelRecord(
            name=values["name"],
            family=Family(family),
            gflops=values["gflops"],
            top1=values["top1"],
            params_m=values["params_m"],
            search_gpu_hours=values["search_gpu_hours"],
            gpu_id=values["gpu_id"],
            cpu_id=values["cpu_id"],
            citations=values["citations"],
            schedule=schedule,
        )
    except ValidationError as exc:
        raise ValidationError([(row, f, m) for _, f, m in exc.problems]) from None


def _csv_rows(text: str) -> Iterator[tuple[int, dict[str, str]]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise ParseError("missing header row", line=1)
        header = [h.strip() for h in header]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ParseError("header lacks required column", line=1, field=missing[0])
        dupes = {h for h in header if header.count(h) > 1}
        if dupes:
            raise ParseError("header repeats a column", line=1, field=sorted(dupes)[0])
        unknown = [h for h in header if h not in COLUMNS]
        if unknown:
            log.warning("ignoring unknown registry columns: %s", ", ".join(unknown))
        row_no = 0
        for cells in reader:
            if not cells or all(not c.strip() for c in cells):
                continue
            row_no += 1
            if len(cells) != len(header):
                raise _MalformedRow(row_no, f"expected {len(header)} cells, found {len(cells)}")
            yield row_no, dict(zip(header, cells))
    except csv.Error as exc:
        raise ParseError(str(exc), line=reader.line_num) from None


class _MalformedRow(Exception):
    def __init__(self, row: int, message: str):
        self.row = row
        self.message = message


def _json_rows(text: str) -> Iterator[tuple[int, dict[str, Any]]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(data, list):
        raise ParseError("registry JSON must be an array of objects")
    for i, obj in enumerate(data, start=1):
        if not isinstance(obj, dict):
            raise _MalformedRow(i, f"expected an object, got {type(obj).__name__}")
        unknown = sorted(set(obj) - set(COLUMNS))
        if unknown:
            log.warning("row %d: ignoring unknown fields: %s", i, ", ".join(unknown))
        yield i, obj


def parse_registry(text: str, fmt: str, source: str = "<string>") -> Registry:
    """Parse registry text, aggregating every row-level problem into one error."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unsupported registry format: {fmt!r}")
    rows = _csv_rows(text) if fmt == "csv" else _json_rows(text)
    records: list[ModelRecord] = []
    problems: list[tuple[int | None, str | None, str]] = []
    first_seen: dict[str, int] = {}
    duplicate: tuple[str, int, int] | None = None
    try:
        for row_no, raw in rows:
            try:
                rec = record_from_mapping(raw, row_no)
            except ValidationError as exc:
                problems.extend(exc.problems)
                continue
            if rec.name in first_seen:
                duplicate = duplicate or (rec.name, first_seen[rec.name], row_no)
                problems.append((row_no, "name", f"duplicate model name {rec.name!r} (first seen on row {first_seen[rec.name]})"))
                continue
            first_seen[rec.name] = row_no
            records.append(rec)
    except _MalformedRow as exc:
        problems.append((exc.row, None, f"malformed row: {exc.message}"))

    if problems:
        if duplicate is not None and len(problems) == 1:
            name, first, second = duplicate
            raise DuplicateName(name, (first, second))
        raise ValidationError(problems)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return Registry(tuple(records), Provenance(source, fmt, stamp))


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    return "csv"


def ingest(path: str | Path, fmt: str | None = None) -> Registry:
    """Read and validate a registry file (format inferred from the suffix when omitted)."""
    path = Path(path)
    fmt = fmt or detect_format(path)
    text = path.read_text(encoding="utf-8-sig")
    return parse_registry(text, fmt, source=str(path))


def fixture_text() -> str:
    return resources.files("carbon_ledger.data").joinpath("fixture_registry.csv").read_text(encoding="utf-8")


def fixture_registry() -> Registry:
    """Small bundled demo registry (illustrative public model-zoo numbers)."""
    return parse_registry(fixture_text(), "csv", source="carbon_ledger:fixture_registry.csv")


# -- export -----------------------------------------------------------------


def _record_to_fields(r: ModelRecord) -> dict[str, Any]:
    return {
        "name": r.name,
        "family": r.family.value,
        "top1": r.top1,
        "params_m": r.params_m,
        "gflops": r.gflops,
        "search_gpu_hours": r.search_gpu_hours,
        "gpu_id": r.gpu_id,
        "cpu_id": r.cpu_id,
        "citations": r.citations,
        "epochs": r.schedule.epochs if r.schedule else None,
        "min_per_epoch": r.schedule.minutes_per_epoch if r.schedule else None,
    }


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize(records: Iterable[ModelRecord] | Registry, fmt: str = "csv") -> str:
    """Deterministic export (fixed column order, LF endings) that :func:`parse_registry` reads back."""
    rows = [_record_to_fields(r) for r in records]
    if fmt == "json":
        return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unsupported registry format: {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in COLUMNS])
    return buf.getvalue()


# -- per-record estimates ---------------------------------------------------


def effective_schedule(record: ModelRecord) -> TrainingSchedule:
    """The record's own schedule, else 250 epochs at 40 min (hand-crafted) or 60 min (NAS)."""
    if record.schedule is not None:
        return record.schedule
    return HAND_CRAFTED_SCHEDULE if record.family is Family.HAND_CRAFTED else NAS_SCHEDULE


def resolve_hardware(record: ModelRecord, db: HardwareDb) -> Resolution:
    return resolve_with_defaults(db, record.gpu_id, record.cpu_id)


def search_phase_energy(record: ModelRecord, db: HardwareDb, factors: EmissionFactors = EmissionFactors()) -> EnergyEstimate:
    if record.search_gpu_hours is None:
        raise MissingField("search_gpu_hours", record.name)
    hw = resolve_hardware(record, db)
    return search_energy(record.search_gpu_hours, hw.gpu.power_draw, hw.cpu.power_draw, factors)


def search_phase_estimate(record: ModelRecord, db: HardwareDb, factors: EmissionFactors = EmissionFactors()) -> Co2Estimate:
    """Search-phase CO2 for a record; unreported hardware falls back to the database defaults."""
    return energy_to_co2(search_phase_energy(record, db, factors), factors)


def per_training_estimate(record: ModelRecord, db: HardwareDb, factors: EmissionFactors = EmissionFactors()) -> Co2Estimate:
    """CO2 of one community training run of the record's architecture."""
    hw = resolve_hardware(record, db)
    return per_training_co2(record.flops, hw.gpu, hw.cpu, effective_schedule(record), factors)

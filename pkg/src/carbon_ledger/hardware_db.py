"""Device power and peak-throughput database.

Power draw is the rated board power / TDP in watts; peak throughput is the
single-precision (FP32) peak in FLOP/s. Files carry peak throughput in
GFLOP/s and are converted on load.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping

from carbon_ledger.errors import ParseError, UnknownHardware, ValidationError

DEFAULT_GPU_ID = "nvidia-v100"
DEFAULT_CPU_ID = "intel-i7-10750h"

_GFLOPS = 1e9
_FILE_FIELDS = ("id", "kind", "power_draw_watts", "peak_gflops", "source_note")


class Kind(str, enum.Enum):
    GPU = "gpu"
    CPU = "cpu"


@dataclass(frozen=True)
class HardwareSpec:
    id: str
    kind: Kind
    power_draw: float  # W
    peak_throughput: float  # FLOP/s
    source_note: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(str(self.kind).lower()))
        if not self.id:
            raise ValidationError([(None, "id", "hardware id must be non-empty")])
        if not self.power_draw > 0:
            raise ValidationError([(None, "power_draw", f"{self.id}: power draw must be > 0, got {self.power_draw}")])
        if not self.peak_throughput > 0:
            raise ValidationError(
                [(None, "peak_throughput", f"{self.id}: peak throughput must be > 0, got {self.peak_throughput}")]
            )

    @property
    def peak_gflops(self) -> float:
        return self.peak_throughput / _GFLOPS


@dataclass(frozen=True)
class Resolution:
    """Outcome of :func:`resolve_with_defaults`, recording which defaults were used."""

    gpu: HardwareSpec
    cpu: HardwareSpec
    gpu_defaulted: bool
    cpu_defaulted: bool

    @property
    def defaults_applied(self) -> tuple[str, ...]:
        return tuple(k for k, used in (("gpu", self.gpu_defaulted), ("cpu", self.cpu_defaulted)) if used)


@dataclass(frozen=True)
class HardwareDb:
    entries: Mapping[str, HardwareSpec]
    default_gpu_id: str = DEFAULT_GPU_ID
    default_cpu_id: str = DEFAULT_CPU_ID
    _index: Mapping[str, HardwareSpec] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        entries = dict(self.entries)
        index: dict[str, HardwareSpec] = {}
        for key, spec in entries.items():
            if key != spec.id:
                raise ValidationError([(None, "id", f"entry key {key!r} does not match spec id {spec.id!r}")])
            folded = key.casefold()
            if folded in index:
                raise ValidationError([(None, "id", f"duplicate hardware id {key!r}")])
            index[folded] = spec
        object.__setattr__(self, "entries", MappingProxyType(entries))
        object.__setattr__(self, "_index", MappingProxyType(index))
        for label, hw_id, kind in (("default_gpu_id", self.default_gpu_id, Kind.GPU),
                                   ("default_cpu_id", self.default_cpu_id, Kind.CPU)):
            spec = index.get(hw_id.casefold())
            if spec is None:
                raise ValidationError([(None, label, f"default {hw_id!r} is not in the database")])
            if spec.kind is not kind:
                raise ValidationError([(None, label, f"default {hw_id!r} is a {spec.kind.value}, expected {kind.value}")])

    @classmethod
    def from_specs(cls, specs: list[HardwareSpec], **defaults: str) -> "HardwareDb":
        return cls({s.id: s for s in specs}, **defaults)

    def __iter__(self) -> Iterator[HardwareSpec]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, hw_id: object) -> bool:
        return isinstance(hw_id, str) and hw_id.casefold() in self._index


def lookup(db: HardwareDb, hw_id: str) -> HardwareSpec:
    """Return the spec for ``hw_id`` (case-insensitive)."""
    try:
        return db._index[hw_id.casefold()]
    except KeyError:
        raise UnknownHardware(hw_id) from None


def resolve_with_defaults(db: HardwareDb, gpu_id: str | None = None, cpu_id: str | None = None) -> Resolution:
    """Resolve a (GPU, CPU) pair, falling back to the database defaults for absent ids.

    Unreported hardware is assumed to be the default devices (V100 and
    i7-10750H in the built-in database); the returned :class:`Resolution`
    flags which fallbacks were taken.
    """
    gpu_defaulted = not gpu_id
    cpu_defaulted = not cpu_id
    gpu = lookup(db, db.default_gpu_id if gpu_defaulted else gpu_id)
    cpu = lookup(db, db.default_cpu_id if cpu_defaulted else cpu_id)
    return Resolution(gpu, cpu, gpu_defaulted, cpu_defaulted)


def watt_per_flops(spec: HardwareSpec) -> float:
    """Device watts per FLOP/s of peak throughput."""
    return spec.power_draw / spec.peak_throughput


# -- file format ------------------------------------------------------------


def _spec_from_obj(obj: object, index: int) -> HardwareSpec:
    where = f"entry {index}"
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object, got {type(obj).__name__}")
    missing = [k for k in ("id", "kind", "power_draw_watts", "peak_gflops") if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing key", field=missing[0])
    hw_id = obj["id"]
    if not isinstance(hw_id, str) or not hw_id.strip():
        raise ParseError(f"{where}: id must be a non-empty string", field="id")
    kind = obj["kind"]
    if not isinstance(kind, str) or kind.lower() not in ("gpu", "cpu"):
        raise ParseError(f"{where} ({hw_id}): kind must be 'gpu' or 'cpu', got {kind!r}", field="kind")
    values = {}
    for key in ("power_draw_watts", "peak_gflops"):
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{where} ({hw_id}): {key} must be a number, got {v!r}", field=key)
        if not v > 0:
            raise ValidationError([(index, key, f"{hw_id}: {key} must be > 0, got {v}")])
        values[key] = float(v)
    note = obj.get("source_note", "")
    if not isinstance(note, str):
        raise ParseError(f"{where} ({hw_id}): source_note must be a string", field="source_note")
    return HardwareSpec(
        id=hw_id.strip(),
        kind=Kind(kind.lower()),
        power_draw=values["power_draw_watts"],
        peak_throughput=values["peak_gflops"] * _GFLOPS,
        source_note=note,
    )


def parse_specs(text: str) -> list[HardwareSpec]:
    """Parse the hardware JSON format into specs. Blank input yields no specs."""
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(data, list):
        raise ParseError("hardware file must contain a JSON array")
    specs = [_spec_from_obj(obj, i) for i, obj in enumerate(data)]
    seen: set[str] = set()
    for i, spec in enumerate(specs):
        if spec.id.casefold() in seen:
            raise ValidationError([(i, "id", f"hardware id {spec.id!r} appears twice in one file")])
        seen.add(spec.id.casefold())
    return specs


def serialize(db: HardwareDb) -> str:
    """Canonical JSON for ``db``, in insertion order, LF-terminated."""
    rows = [
        {
            "id": s.id,
            "kind": s.kind.value,
            "power_draw_watts": s.power_draw,
            "peak_gflops": s.peak_gflops,
            "source_note": s.source_note,
        }
        for s in db
    ]
    return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"


def load_overrides(db: HardwareDb, path: str | Path) -> HardwareDb:
    """Return a new database with the entries in ``path`` replacing or extending ``db``."""
    text = Path(path).read_text(encoding="utf-8")
    specs = parse_specs(text)
    if not specs:
        return db
    merged = {s.id.casefold(): s for s in db}
    for spec in specs:
        merged[spec.id.casefold()] = spec
    return HardwareDb.from_specs(
        list(merged.values()), default_gpu_id=db.default_gpu_id, default_cpu_id=db.default_cpu_id
    )


def builtin_text() -> str:
    return resources.files("carbon_ledger.data").joinpath("hardware.json").read_text(encoding="utf-8")


def builtin_db() -> HardwareDb:
    return HardwareDb.from_specs(parse_specs(builtin_text()))


def with_defaults(db: HardwareDb, *, gpu_id: str | None = None, cpu_id: str | None = None) -> HardwareDb:
    """Copy of ``db`` with different default devices."""
    return replace(
        db,
        entries=dict(db.entries),
        default_gpu_id=lookup(db, gpu_id).id if gpu_id else db.default_gpu_id,
        default_cpu_id=lookup(db, cpu_id).id if cpu_id else db.default_cpu_id,
    )

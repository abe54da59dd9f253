"""``carbon-ledger`` command-line interface.

Exit codes: 0 success, 2 invalid input, 3 unknown hardware, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from carbon_ledger import __version__
from carbon_ledger.config import ENV_VAR, Config, config_path, from_mapping, load_config
from carbon_ledger.emissions import (
    HAND_CRAFTED_SCHEDULE,
    NAS_SCHEDULE,
    Co2Estimate,
    EnergyEstimate,
    TrainingSchedule,
    energy_to_co2,
    eval_energy,
    search_energy,
)
from carbon_ledger.equivalency import co2_to_cars, co2_to_homes
from carbon_ledger.errors import CarbonLedgerError, UnknownHardware, format_problem
from carbon_ledger.hardware_db import resolve_with_defaults, watt_per_flops
from carbon_ledger.registry import Family, ingest, serialize
from carbon_ledger.report import (
    equivalents_table,
    format_sig,
    lifetime_table,
    registry_digest,
    registry_series,
    render,
    search_scatter,
)

log = logging.getLogger("carbon_ledger")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_HARDWARE = 3
EXIT_IO = 4

_EXT = {"csv": "csv", "json": "json", "md": "md"}


@dataclass(frozen=True)
class SearchEstimateRow:
    gpu_id: str
    cpu_id: str
    defaults_applied: str
    gpu_hours: float
    energy_wh: float
    co2_kg: float


@dataclass(frozen=True)
class EvalEstimateRow:
    gpu_id: str
    cpu_id: str
    defaults_applied: str
    gflops: float
    gpu_hours: float
    omega_g_w_per_flops: float
    omega_c_w_per_flops: float
    energy_wh: float
    co2_kg: float


@dataclass(frozen=True)
class HardwareRow:
    id: str
    kind: str
    power_draw_watts: float
    peak_gflops: float
    watt_per_gflops: float
    default: bool
    source_note: str


def _plain(x: float) -> str:
    s = format_sig(x, 6)
    return s.rstrip("0").rstrip(".") if "." in s else s


# -- plumbing ---------------------------------------------------------------


def _build_config(args: argparse.Namespace) -> Config:
    path = config_path(args.config)
    cfg = load_config(path) if path is not None else Config()
    return from_mapping(
        {
            "pue": args.pue,
            "ef_kg_per_kwh": args.ef_kg_per_kwh,
            "tonnes_per_car_year": args.tonnes_per_car_year,
            "tonnes_per_home_year": args.tonnes_per_home_year,
            "trainings_per_citation": args.trainings_per_citation,
            "apply_pue_to_eval": True if args.apply_pue_to_eval else None,
            "hardware_overrides": args.hardware,
        },
        base=cfg,
    )


def _emit(data: bytes, args: argparse.Namespace, stem: str) -> None:
    out = args.output
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    path = Path(out)
    if path.is_dir():
        path = path / f"{stem}.report.{_EXT[args.format or 'csv']}"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    print(f"wrote {path}", file=sys.stderr)


def _provenance(reg, cfg: Config, **extra: Any) -> dict[str, Any]:
    return {"registry": registry_digest(reg), "config": cfg.as_dict(), **extra}


def _load_registry(args: argparse.Namespace):
    return ingest(args.registry, args.input_format)


# -- commands ---------------------------------------------------------------


def cmd_estimate_search(args: argparse.Namespace, cfg: Config) -> int:
    db = cfg.hardware_db()
    hw = resolve_with_defaults(db, args.gpu, args.cpu)
    energy = search_energy(args.gpu_hours, hw.gpu.power_draw, hw.cpu.power_draw, cfg.factors)
    co2 = energy_to_co2(energy, cfg.factors)
    if args.format is None:
        for label, spec, defaulted in (("gpu", hw.gpu, hw.gpu_defaulted), ("cpu", hw.cpu, hw.cpu_defaulted)):
            note = ", default" if defaulted else ""
            print(f"{label}: {spec.id} ({_plain(spec.power_draw)} W{note})")
        print(f"pue: {cfg.factors.pue}")
        print(f"energy: {_plain(energy.wh)} Wh")
        print(f"co2: {format_sig(co2.kg)} kg")
        return EXIT_OK
    row = SearchEstimateRow(hw.gpu.id, hw.cpu.id, "+".join(hw.defaults_applied), float(args.gpu_hours), energy.wh, co2.kg)
    _emit(render([row], args.format, {"config": cfg.as_dict()}), args, "estimate-search")
    return EXIT_OK


def cmd_estimate_eval(args: argparse.Namespace, cfg: Config) -> int:
    db = cfg.hardware_db()
    hw = resolve_with_defaults(db, args.gpu, args.cpu)
    if args.gpu_hours is not None:
        hours = args.gpu_hours
    elif args.epochs is not None or args.min_per_epoch is not None:
        if args.epochs is None or args.min_per_epoch is None:
            raise CarbonLedgerError("--epochs and --min-per-epoch must be given together")
        hours = TrainingSchedule(args.epochs, args.min_per_epoch).gpu_hours()
    else:
        hours = (NAS_SCHEDULE if args.family == Family.NAS_SEARCHED.value else HAND_CRAFTED_SCHEDULE).gpu_hours()
    og, oc = watt_per_flops(hw.gpu), watt_per_flops(hw.cpu)
    energy = eval_energy(args.gflops * 1e9, og, oc, hours)
    if cfg.factors.apply_pue_to_eval:
        energy = EnergyEstimate(energy.wh * cfg.factors.pue)
    co2 = energy_to_co2(energy, cfg.factors)
    if args.format is None:
        print(f"gpu: {hw.gpu.id} ({og:.6g} W per FLOP/s{', default' if hw.gpu_defaulted else ''})")
        print(f"cpu: {hw.cpu.id} ({oc:.6g} W per FLOP/s{', default' if hw.cpu_defaulted else ''})")
        print(f"gpu_hours: {_plain(hours)} h")
        print(f"energy: {_plain(energy.wh)} Wh")
        print(f"co2: {format_sig(co2.kg)} kg")
        return EXIT_OK
    row = EvalEstimateRow(
        hw.gpu.id, hw.cpu.id, "+".join(hw.defaults_applied), float(args.gflops), float(hours), og, oc, energy.wh, co2.kg
    )
    _emit(render([row], args.format, {"config": cfg.as_dict()}), args, "estimate-eval")
    return EXIT_OK


def cmd_lifetime(args: argparse.Namespace, cfg: Config) -> int:
    reg = _load_registry(args)
    rows = lifetime_table(
        reg, cfg.hardware_db(), cfg.factors, cfg.eq_factors, cfg.trainings_per_citation,
        n_trainings=None if args.from_citations else args.n,
    )
    mode = "citations" if args.from_citations else f"n={args.n}"
    data = render(rows, args.format or "csv", _provenance(reg, cfg, trainings=mode))
    _emit(data, args, Path(args.registry).stem)
    return EXIT_OK


def cmd_report(args: argparse.Namespace, cfg: Config) -> int:
    reg = _load_registry(args)
    db = cfg.hardware_db()
    records = [r for r in reg if not args.model or r.name in args.model]
    missing = sorted(set(args.model or ()) - {r.name for r in reg})
    if missing:
        raise CarbonLedgerError(f"no such model in registry: {', '.join(missing)}")
    fmt = args.format or "csv"
    if args.kind == "scatter":
        rows, skipped = search_scatter(records, db, cfg.factors)
        for name in skipped:
            print(f"notice: {name} has no search GPU-hours; left out of the scatter", file=sys.stderr)
        data = render(rows, fmt, _provenance(records, cfg, kind="scatter"), columns=[
            "model_name", "top1", "gflops", "search_co2_kg"])
    elif args.kind == "series":
        series = registry_series(records, db, cfg.factors, args.n_max, args.step)
        data = render(series, fmt, _provenance(records, cfg, kind="series", n_max=args.n_max, step=args.step),
                      columns=["label", "n_trainings", "evaluation_co2_kg", "amortized_co2_kg"])
    else:
        rows = lifetime_table(records, db, cfg.factors, cfg.eq_factors, cfg.trainings_per_citation)
        data = render(rows, fmt, _provenance(records, cfg, kind="lifetime"))
    _emit(data, args, f"{Path(args.registry).stem}.{args.kind}")
    return EXIT_OK


def _parse_amount(text: str) -> tuple[str, float]:
    label, sep, value = text.rpartition("=")
    try:
        kg = float(value)
    except ValueError:
        raise CarbonLedgerError(f"not a CO2 amount in kg: {text!r}") from None
    return (label if sep else value), kg


def cmd_equivalents(args: argparse.Namespace, cfg: Config) -> int:
    totals = [(label, Co2Estimate(kg)) for label, kg in map(_parse_amount, args.co2_kg)]
    if args.format is None:
        for label, co2 in totals:
            cars, homes = co2_to_cars(co2, cfg.eq_factors), co2_to_homes(co2, cfg.eq_factors)
            print(
                f"{label}: {_plain(co2.kg)} kg CO2 ({format_sig(co2.tonnes)} t) = "
                f"{format_sig(cars)} cars driven for a year, {format_sig(homes)} homes powered for a year"
            )
        return EXIT_OK
    rows = equivalents_table(totals, cfg.eq_factors)
    _emit(render(rows, args.format, {"config": cfg.as_dict()}), args, "equivalents")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace, cfg: Config) -> int:
    try:
        reg = _load_registry(args)
    except CarbonLedgerError as exc:
        problems = getattr(exc, "problems", None)
        if problems:
            for p in problems:
                print(f"error: {format_problem(p)}", file=sys.stderr)
            print(f"0 records, {len(problems)} errors")
        else:
            print(f"error: {exc}", file=sys.stderr)
            print("0 records, 1 errors")
        return EXIT_INPUT
    print(f"{len(reg)} records, 0 errors")
    if args.export:
        fmt = args.export_format or ("json" if Path(args.export).suffix.lower() == ".json" else "csv")
        Path(args.export).write_text(serialize(reg, fmt), encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_hardware_list(args: argparse.Namespace, cfg: Config) -> int:
    db = cfg.hardware_db()
    rows = [
        HardwareRow(
            s.id, s.kind.value, s.power_draw, s.peak_gflops, s.power_draw / s.peak_gflops,
            s.id in (db.default_gpu_id, db.default_cpu_id), s.source_note,
        )
        for s in db
    ]
    _emit(render(rows, args.format or "md"), args, "hardware")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help=f"TOML config file (falls back to ${ENV_VAR})")
    g.add_argument("--format", choices=("csv", "json", "md"), help="output format")
    g.add_argument("--output", help="output file, or a directory to receive <name>.report.<ext>")
    g.add_argument("--hardware", help="JSON hardware override file (power in W, peak in GFLOP/s)")
    g.add_argument("--pue", type=float, help="power usage effectiveness, >= 1 (default 1.59)")
    g.add_argument("--ef-kg-per-kwh", type=float, help="grid emission factor in kg CO2 per kWh (default 0.707)")
    g.add_argument("--trainings-per-citation", type=int, help="trainings per citing paper (default 50)")
    g.add_argument("--apply-pue-to-eval", action="store_true", default=None,
                   help="also multiply evaluation-phase energy by the PUE")
    g.add_argument("--tonnes-per-car-year", type=float, help="t CO2 per car driven for one year")
    g.add_argument("--tonnes-per-home-year", type=float, help="t CO2 per home powered for one year")
    g.add_argument("-v", "--verbose", action="store_true", help="log notices to stderr")
    return p


def _command(sub, name: str, parents=(), text: str = "") -> argparse.ArgumentParser:
    return sub.add_parser(name, parents=list(parents), help=text, description=text)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="carbon-ledger",
        description="Estimate search-phase and lifetime training CO2 of vision models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = _command(sub, "estimate-search", parents=[common],
                       text="search-phase energy (Wh) and CO2 (kg) from GPU-hours")
    p.add_argument("--gpu-hours", type=float, required=True, help="device-hours of search, in hours")
    p.add_argument("--gpu", help="GPU id (default: database default GPU)")
    p.add_argument("--cpu", help="CPU id (default: database default CPU)")
    p.set_defaults(func=cmd_estimate_search)

    p = _command(sub, "estimate-eval", parents=[common],
                       text="energy (Wh) and CO2 (kg) of one training run from model GFLOPs")
    p.add_argument("--gflops", type=float, required=True, help="model FLOPs per forward pass, in GFLOPs")
    p.add_argument("--gpu", help="GPU id (default: database default GPU)")
    p.add_argument("--cpu", help="CPU id (default: database default CPU)")
    p.add_argument("--gpu-hours", type=float, help="training duration in hours (overrides the schedule)")
    p.add_argument("--epochs", type=int, help="training epochs")
    p.add_argument("--min-per-epoch", type=float, help="minutes per epoch")
    p.add_argument("--family", choices=[f.value for f in Family], default=Family.HAND_CRAFTED.value,
                   help="picks the default schedule: 250 epochs x 40 min (hand_crafted) or x 60 min (nas_searched)")
    p.set_defaults(func=cmd_estimate_eval)

    p = _command(sub, "lifetime", parents=[common],
                       text="lifetime CO2 table (kg, car-years, home-years) for a registry")
    p.add_argument("registry", help="registry file (.csv or .json); FLOPs in GFLOPs, hours in hours")
    p.add_argument("--input-format", choices=("csv", "json"), help="registry format (default: from suffix)")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--n", type=int, help="number of trainings applied to every model")
    mode.add_argument("--from-citations", action="store_true",
                      help="trainings = citations x trainings-per-citation")
    p.set_defaults(func=cmd_lifetime)

    p = _command(sub, "report", parents=[common],
                       text="figure-ready data: search scatter, lifetime series or lifetime table")
    p.add_argument("registry", help="registry file (.csv or .json)")
    p.add_argument("--input-format", choices=("csv", "json"), help="registry format (default: from suffix)")
    p.add_argument("--kind", choices=("scatter", "series", "lifetime"), default="lifetime",
                   help="scatter: search CO2 kg vs top-1 and GFLOPs; series: CO2 kg vs trainings; "
                        "lifetime: citation-based lifetime CO2 kg")
    p.add_argument("--n-max", type=int, default=1_000_000, help="series: last number of trainings")
    p.add_argument("--step", type=int, default=100_000, help="series: spacing in trainings")
    p.add_argument("--model", action="append", help="restrict to this model name (repeatable)")
    p.set_defaults(func=cmd_report)

    p = _command(sub, "equivalents", parents=[common],
                       text="express kg of CO2 as cars driven and homes powered for a year")
    p.add_argument("co2_kg", nargs="+", metavar="CO2_KG",
                   help="CO2 mass in kg, optionally labelled as LABEL=KG")
    p.set_defaults(func=cmd_equivalents)

    p = _command(sub, "ingest", parents=[common], text="validate a registry file and summarise it")
    p.add_argument("registry", help="registry file (.csv or .json)")
    p.add_argument("--input-format", choices=("csv", "json"), help="registry format (default: from suffix)")
    p.add_argument("--export", help="write the validated registry to this path")
    p.add_argument("--export-format", choices=("csv", "json"), help="export format (default: from suffix)")
    p.set_defaults(func=cmd_ingest)

    p = _command(sub, "hardware", text="hardware database commands")
    hw_sub = p.add_subparsers(dest="hw_command", required=True, metavar="ACTION")
    hp = _command(hw_sub, "list", parents=[common],
                           text="list devices: power in W, peak in GFLOP/s, W per GFLOP/s")
    hp.set_defaults(func=cmd_hardware_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _build_config(args)
        return args.func(args, cfg)
    except UnknownHardware as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARDWARE
    except CarbonLedgerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from carbon_ledger.errors import ParseError, UnknownHardware, ValidationError
from carbon_ledger.hardware_db import (
    HardwareDb,
    HardwareSpec,
    Kind,
    builtin_db,
    builtin_text,
    load_overrides,
    lookup,
    parse_specs,
    resolve_with_defaults,
    serialize,
    watt_per_flops,
    with_defaults,
)


def test_lookup_v100_datasheet_power(db):
    spec = lookup(db, "nvidia-v100")
    assert spec.power_draw == 250.0
    assert spec.kind is Kind.GPU
    assert "250 W" in spec.source_note


def test_lookup_i7_tdp(db):
    spec = lookup(db, "intel-i7-10750h")
    assert spec.power_draw == 45.0
    assert spec.kind is Kind.CPU
    assert "LOW CONFIDENCE" in spec.source_note


def test_lookup_is_case_insensitive(db):
    assert lookup(db, "NVIDIA-V100") is lookup(db, "nvidia-v100")


def test_lookup_unknown(db):
    with pytest.raises(UnknownHardware) as exc:
        lookup(db, "no-such-gpu")
    assert "no-such-gpu" in str(exc.value)


def test_resolve_defaults_both_absent(db):
    res = resolve_with_defaults(db)
    assert (res.gpu.id, res.cpu.id) == ("nvidia-v100", "intel-i7-10750h")
    assert res.gpu_defaulted and res.cpu_defaulted
    assert res.defaults_applied == ("gpu", "cpu")


def test_resolve_explicit_default_is_not_flagged(db):
    res = resolve_with_defaults(db, "nvidia-v100", None)
    assert res.gpu.id == "nvidia-v100" and res.cpu.id == "intel-i7-10750h"
    assert res.defaults_applied == ("cpu",)


def test_resolve_unknown(db):
    with pytest.raises(UnknownHardware):
        resolve_with_defaults(db, "no-such-gpu", None)


@pytest.mark.parametrize(
    "power, peak, expected",
    [
        (250.0, 14e12, 250 / 14e12),  # 1.7857e-11 by hand division
        (1.0, 1.0, 1.0),
        (45.0, 0.5e12, 9.0e-11),
    ],
)
def test_watt_per_flops(power, peak, expected):
    spec = HardwareSpec("x", Kind.GPU, power, peak)
    assert watt_per_flops(spec) == pytest.approx(expected, rel=1e-12)


def test_watt_per_flops_v100_value():
    spec = HardwareSpec("x", Kind.GPU, 250.0, 14e12)
    assert watt_per_flops(spec) == pytest.approx(1.7857e-11, rel=1e-4)


@given(
    power=st.floats(min_value=1e-3, max_value=1e5),
    peak=st.floats(min_value=1e3, max_value=1e18),
)
def test_watt_per_flops_inverts(power, peak):
    spec = HardwareSpec("x", Kind.CPU, power, peak)
    assert watt_per_flops(spec) * spec.peak_throughput == pytest.approx(power, rel=1e-12)


def test_builtin_entries_invert(db):
    for spec in db:
        assert watt_per_flops(spec) > 0
        assert watt_per_flops(spec) * spec.peak_throughput == pytest.approx(spec.power_draw, rel=1e-12)


def test_builtin_round_trips_bit_identically():
    assert serialize(builtin_db()) == builtin_text()
    assert serialize(HardwareDb.from_specs(parse_specs(serialize(builtin_db())))) == builtin_text()


def test_empty_override_is_noop(db, tmp_path):
    path = tmp_path / "hw.json"
    path.write_text("", encoding="utf-8")
    assert load_overrides(db, path) is db
    path.write_text("[]", encoding="utf-8")
    assert load_overrides(db, path) is db


def test_override_replaces_and_extends(db, tmp_path):
    path = tmp_path / "hw.json"
    path.write_text(json.dumps([
        {"id": "NVIDIA-V100", "kind": "gpu", "power_draw_watts": 300, "peak_gflops": 15700, "source_note": "sxm2"},
        {"id": "my-tpu", "kind": "gpu", "power_draw_watts": 200, "peak_gflops": 45000, "source_note": ""},
    ]), encoding="utf-8")
    new = load_overrides(db, path)
    assert lookup(new, "nvidia-v100").power_draw == 300
    assert lookup(new, "my-tpu").peak_throughput == 45000e9
    assert len(new) == len(db) + 1
    # original untouched, defaults still resolve
    assert lookup(db, "nvidia-v100").power_draw == 250
    res = resolve_with_defaults(new)
    assert res.gpu.power_draw == 300 and res.cpu.id == "intel-i7-10750h"


def test_override_negative_power(db, tmp_path):
    path = tmp_path / "hw.json"
    path.write_text('[{"id": "bad", "kind": "gpu", "power_draw_watts": -5, "peak_gflops": 10}]', encoding="utf-8")
    with pytest.raises(ValidationError) as exc:
        load_overrides(db, path)
    assert exc.value.problems[0][1] == "power_draw_watts"


def test_override_parse_error_reports_line(db, tmp_path):
    path = tmp_path / "hw.json"
    path.write_text('[\n  {"id": "x",\n  "kind": }\n]', encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_overrides(db, path)
    assert exc.value.line == 3


def test_override_missing_field(db, tmp_path):
    path = tmp_path / "hw.json"
    path.write_text('[{"id": "x", "kind": "gpu", "power_draw_watts": 5}]', encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_overrides(db, path)
    assert exc.value.field == "peak_gflops"


def test_defaults_must_exist():
    spec = HardwareSpec("g", Kind.GPU, 1.0, 1.0)
    with pytest.raises(ValidationError):
        HardwareDb.from_specs([spec])


def test_spec_invariants():
    with pytest.raises(ValidationError):
        HardwareSpec("g", Kind.GPU, 0.0, 1.0)
    with pytest.raises(ValidationError):
        HardwareSpec("g", Kind.GPU, 1.0, -1.0)


def test_db_is_immutable(db):
    with pytest.raises(TypeError):
        db.entries["x"] = None


def test_with_defaults(db):
    other = with_defaults(db, gpu_id="NVIDIA-A100")
    assert resolve_with_defaults(other).gpu.id == "nvidia-a100"
    assert resolve_with_defaults(db).gpu.id == "nvidia-v100"

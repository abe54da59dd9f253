import json
import random

import pytest

from carbon_ledger.cli import build_parser, main
from carbon_ledger.registry import fixture_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate_search_text(capsys):
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "100")
    assert code == 0
    assert "energy: 46905 Wh" in out
    assert "co2: 33.16 kg" in out
    assert "nvidia-v100 (250 W, default)" in out


def test_estimate_search_json(capsys):
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "100", "--format", "json")
    assert code == 0
    [row] = json.loads(out)["rows"]
    assert row["energy_wh"] == pytest.approx(46905, rel=1e-6)
    assert row["co2_kg"] == pytest.approx(33.162, rel=1e-4)
    assert row["defaults_applied"] == "gpu+cpu"


def test_estimate_search_zero(capsys):
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "0")
    assert code == 0
    assert "energy: 0 Wh" in out and "co2: 0 kg" in out


def test_estimate_search_unknown_gpu(capsys):
    code, _, err = run(capsys, "estimate-search", "--gpu-hours", "1", "--gpu", "bad-id")
    assert code == 3
    assert "bad-id" in err


def test_estimate_search_negative(capsys):
    code, _, err = run(capsys, "estimate-search", "--gpu-hours", "-1")
    assert code == 2


def test_estimate_search_pue_flag(capsys):
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "1", "--pue", "1.0")
    assert "energy: 295 Wh" in out
    code, _, err = run(capsys, "estimate-search", "--gpu-hours", "1", "--pue", "0.5")
    assert code == 2


def test_estimate_eval(capsys):
    code, out, _ = run(capsys, "estimate-eval", "--gflops", "4.1", "--format", "json")
    assert code == 0
    [row] = json.loads(out)["rows"]
    assert row["gpu_hours"] == pytest.approx(250 * 40 / 60)
    assert row["energy_wh"] == pytest.approx(73.70238095238095, rel=1e-9)
    code, out, _ = run(capsys, "estimate-eval", "--gflops", "4.1", "--family", "nas_searched", "--format", "json")
    assert json.loads(out)["rows"][0]["gpu_hours"] == 250.0
    code, out, _ = run(capsys, "estimate-eval", "--gflops", "4.1", "--epochs", "10", "--min-per-epoch", "6")
    assert "gpu_hours: 1 h" in out


def test_equivalents(capsys):
    code, out, _ = run(capsys, "equivalents", "326600", "--format", "json")
    [row] = json.loads(out)["rows"]
    assert row["cars"] == pytest.approx(70.6, rel=0.01)
    assert row["homes"] == pytest.approx(55.3, rel=0.01)
    code, out, _ = run(capsys, "equivalents", "0")
    assert "= 0 cars driven for a year, 0 homes powered for a year" in out
    code, out, _ = run(capsys, "equivalents", "VGG=181700", "--format", "json")
    [row] = json.loads(out)["rows"]
    assert row["model_name"] == "VGG"
    assert row["cars"] == pytest.approx(39.8, rel=0.02)
    code, _, _ = run(capsys, "equivalents", "lots")
    assert code == 2


def test_hardware_list(capsys):
    code, out, _ = run(capsys, "hardware", "list")
    assert code == 0
    assert "| nvidia-v100 | gpu | 250.0 |" in out
    assert "| intel-i7-10750h | cpu | 45.0 |" in out
    code, out, _ = run(capsys, "hardware", "list", "--format", "json")
    defaults = {r["id"] for r in json.loads(out)["rows"] if r["default"]}
    assert defaults == {"nvidia-v100", "intel-i7-10750h"}


def test_hardware_override_flag(capsys, tmp_path):
    hw = tmp_path / "hw.json"
    hw.write_text('[{"id": "nvidia-v100", "kind": "gpu", "power_draw_watts": 300, "peak_gflops": 15700}]')
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "1", "--pue", "1", "--hardware", str(hw))
    assert "energy: 345 Wh" in out


def test_ingest_fixture(capsys, fixture_csv):
    code, out, _ = run(capsys, "ingest", str(fixture_csv))
    assert code == 0
    assert out.strip() == "7 records, 0 errors"


@pytest.mark.parametrize("variant, row", [("negative_flops", 3), ("duplicate_name", 8), ("malformed_row", 5)])
def test_ingest_corrupt(capsys, corrupted, variant, row):
    code, out, err = run(capsys, "ingest", str(corrupted[variant]))
    assert code == 2
    assert f"row {row}" in err
    assert "0 records" in out


def test_ingest_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "lifetime", str(tmp_path / "nope.csv"), "--n", "1")
    assert code == 4


def test_ingest_export_round_trip(capsys, fixture_csv, tmp_path):
    out_json = tmp_path / "out.json"
    assert run(capsys, "ingest", str(fixture_csv), "--export", str(out_json))[0] == 0
    out_csv = tmp_path / "out.csv"
    assert run(capsys, "ingest", str(out_json), "--export", str(out_csv))[0] == 0
    assert out_csv.read_text() == fixture_text()


def test_lifetime_from_citations(capsys, fixture_csv):
    code, out, _ = run(capsys, "lifetime", str(fixture_csv), "--from-citations", "--format", "json")
    assert code == 0
    rows = {r["model_name"]: r for r in json.loads(out)["rows"]}
    assert rows["ResNet-50"]["n_trainings"] == 3_650_000
    assert rows["NAT-M4"]["lifetime_co2_kg"] is None


def test_lifetime_n_zero(capsys, fixture_csv):
    code, out, _ = run(capsys, "lifetime", str(fixture_csv), "--n", "0", "--format", "json")
    assert all(r["lifetime_co2_kg"] == 0 for r in json.loads(out)["rows"])


def test_lifetime_requires_mode(fixture_csv):
    with pytest.raises(SystemExit):
        main(["lifetime", str(fixture_csv)])


def test_lifetime_writes_report_file(capsys, fixture_csv, tmp_path):
    outdir = tmp_path / "reports"
    outdir.mkdir()
    for _ in range(2):
        assert run(capsys, "lifetime", str(fixture_csv), "--from-citations", "--format", "md", "--output", str(outdir))[0] == 0
    [path] = outdir.iterdir()
    assert path.name == "fixture.report.md"
    assert path.read_text().startswith("| model_name |")


@pytest.mark.parametrize("kind", ["scatter", "series", "lifetime"])
@pytest.mark.parametrize("fmt", ["csv", "json", "md"])
def test_report_permutation_invariant(capsys, tmp_path, kind, fmt):
    header, *rows = fixture_text().splitlines()
    shuffled = list(rows)
    random.Random(7).shuffle(shuffled)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("\n".join([header, *rows]) + "\n")
    b.write_text("\n".join([header, *shuffled]) + "\n")
    outs = []
    for path in (a, a, b):
        code, out, _ = run(capsys, "report", str(path), "--kind", kind, "--format", fmt, "--n-max", "1000", "--step", "250")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_report_scatter_notices(capsys, fixture_csv):
    code, out, err = run(capsys, "report", str(fixture_csv), "--kind", "scatter")
    assert code == 0
    assert out.splitlines()[0] == "model_name,top1,gflops,search_co2_kg"
    assert len(out.splitlines()) == 5
    assert err.count("notice:") == 3


def test_report_model_filter(capsys, fixture_csv):
    code, out, _ = run(capsys, "report", str(fixture_csv), "--kind", "series", "--model", "OFA", "--n-max", "10", "--step", "5")
    assert code == 0
    assert out.splitlines()[1:] == [line for line in out.splitlines()[1:] if line.startswith("OFA,")]
    code, _, err = run(capsys, "report", str(fixture_csv), "--model", "Nope")
    assert code == 2


def test_report_bad_range(capsys, fixture_csv):
    code, _, _ = run(capsys, "report", str(fixture_csv), "--kind", "series", "--n-max", "5", "--step", "10")
    assert code == 2


def test_config_file_and_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("pue = 1.0\nef_kg_per_kwh = 1.0\n")
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "1", "--config", str(cfg))
    assert "energy: 295 Wh" in out and "co2: 0.2950 kg" in out
    # flags win over the file
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "1", "--config", str(cfg), "--pue", "2")
    assert "energy: 590 Wh" in out
    monkeypatch.setenv("CARBON_LEDGER_CONFIG", str(cfg))
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "1")
    assert "energy: 295 Wh" in out


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("puee = 1.0\n")
    code, _, err = run(capsys, "estimate-search", "--gpu-hours", "1", "--config", str(cfg))
    assert code == 2 and "puee" in err


def test_config_hardware_relative_path(capsys, tmp_path):
    (tmp_path / "hw.json").write_text('[{"id": "intel-i7-10750h", "kind": "cpu", "power_draw_watts": 95, "peak_gflops": 500}]')
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('pue = 1.0\nhardware_overrides = "hw.json"\n')
    code, out, _ = run(capsys, "estimate-search", "--gpu-hours", "1", "--config", str(cfg))
    assert "energy: 345 Wh" in out


def test_apply_pue_to_eval_flag(capsys):
    _, out, _ = run(capsys, "estimate-eval", "--gflops", "4.1", "--format", "json")
    base = json.loads(out)["rows"][0]["energy_wh"]
    _, out, _ = run(capsys, "estimate-eval", "--gflops", "4.1", "--format", "json", "--apply-pue-to-eval")
    assert json.loads(out)["rows"][0]["energy_wh"] == pytest.approx(base * 1.59)


@pytest.mark.parametrize(
    "argv, units",
    [
        (["estimate-search"], ["hours"]),
        (["estimate-eval"], ["GFLOPs", "hours", "minutes"]),
        (["lifetime"], ["GFLOPs", "hours"]),
        (["report"], ["kg", "GFLOPs"]),
        (["equivalents"], ["kg"]),
        (["hardware", "list"], ["W", "GFLOP/s"]),
    ],
)
def test_help_states_units(capsys, argv, units):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(argv + ["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for unit in units:
        assert unit in text

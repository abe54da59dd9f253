from pathlib import Path

import pytest

from carbon_ledger.hardware_db import builtin_db
from carbon_ledger.registry import fixture_registry, fixture_text


@pytest.fixture(scope="session")
def db():
    return builtin_db()


@pytest.fixture(scope="session")
def fixture_reg():
    return fixture_registry()


@pytest.fixture
def fixture_csv(tmp_path) -> Path:
    path = tmp_path / "fixture.csv"
    path.write_text(fixture_text(), encoding="utf-8")
    return path


def write_corrupted_variants(directory: Path) -> dict[str, Path]:
    """Fixture registry with one defect each: negative FLOPs, a duplicate name, a short row."""
    lines = fixture_text().splitlines()
    header, rows = lines[0], lines[1:]
    variants = {}

    neg = list(rows)
    cells = neg[2].split(",")
    cells[4] = "-1.5"
    neg[2] = ",".join(cells)
    variants["negative_flops"] = neg

    variants["duplicate_name"] = rows + [rows[0]]

    bad = list(rows)
    bad[4] = ",".join(bad[4].split(",")[:5])
    variants["malformed_row"] = bad

    paths = {}
    for name, body in variants.items():
        path = directory / f"{name}.csv"
        path.write_text("\n".join([header, *body]) + "\n", encoding="utf-8")
        paths[name] = path
    return paths


@pytest.fixture
def corrupted(tmp_path) -> dict[str, Path]:
    return write_corrupted_variants(tmp_path)


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")

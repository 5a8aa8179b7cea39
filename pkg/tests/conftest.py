import json
from pathlib import Path

import pytest

from fano_forge import get_preset

DATA = Path(__file__).parent / "data"
_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def golden():
    return json.loads((DATA / "golden.json").read_text())


@pytest.fixture(scope="session")
def fig3a():
    return get_preset("fig3a_blue")


@pytest.fixture
def record_criterion():
    """Log one PASS/FAIL line per acceptance criterion for the summary."""

    def record(label: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((label, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")

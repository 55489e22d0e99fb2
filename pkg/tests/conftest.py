import json
from pathlib import Path

import pytest

from teammon.plan_model import TeamDefinition, load_library
from teammon.scenario_sim import bundled

DATA = Path(__file__).parent / "data"

# criterion id -> outcome, filled in by the acceptance tests
_acceptance: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def modsaf():
    return load_library(bundled("modsaf"))


@pytest.fixture(scope="session")
def modsaf_team():
    return TeamDefinition.from_json(json.loads(bundled("modsaf").read_text())["team"])


@pytest.fixture
def data_dir():
    return DATA


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        for key, value in report.user_properties:
            if key == "criterion":
                crit = value
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        desc = dict(report.user_properties).get("criterion_text", "")
        _acceptance[crit] = (status, desc)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_acceptance, key=lambda c: (int(c.split(".")[0]), c)):
        status, desc = _acceptance[crit]
        terminalreporter.write_line(f"criterion {crit:>4}: {status}  {desc}")

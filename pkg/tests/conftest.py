import re
from pathlib import Path

import pytest

from treebuild import fixture1

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

CRITERIA = {
    1: "Q1-Q7 expressibility against the naive oracle",
    2: "worked queries on FIXTURE-1",
    3: "XC XC NN / XC XC JJ rewrite",
    4: "thread creation and R/T navigation loop",
    5: "property suites (>= 200 cases each)",
    6: "reallocateNames commands",
    7: "CLI exit codes and golden raw output",
}

_outcomes = {}


@pytest.fixture
def fx1():
    return fixture1()


@pytest.fixture
def data_dir():
    return DATA


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    failed = report.failed
    if report.when == "call" or failed:
        _outcomes[n] = _outcomes.get(n, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        if n in _outcomes:
            status = "PASS" if _outcomes[n] else "FAIL"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {n} [{title}]: {status}")

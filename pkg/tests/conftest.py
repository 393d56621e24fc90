from pathlib import Path

import numpy as np
import pytest

from numprimdec.polycore import parse

FIXTURES = Path(__file__).parent / "fixtures"


def load(name: str):
    return parse((FIXTURES / name).read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def xsq_xyz():
    return load("xsq_xyz.sys")


@pytest.fixture
def x3sq_parabola():
    return load("x3sq_parabola.sys")


@pytest.fixture
def fixture_system():
    return load


# acceptance criteria: outcome of every test marked ``criterion(n, title)``
_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed and not rep.skipped):
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "failed": 0, "passed": 0, "skipped": 0})
    if rep.failed:
        entry["failed"] += 1
    elif rep.skipped:
        entry["skipped"] += 1
    elif rep.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "FAIL" if e["failed"] else ("SKIP" if not e["passed"] else "PASS")
        terminalreporter.write_line(f"criterion {num}: {status}  {e['title']} ({e['passed']} passed, {e['failed']} failed)")

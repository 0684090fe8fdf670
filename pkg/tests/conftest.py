import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from playervectors import _accel
from playervectors.events import MatchEvent, PitchPoint, RawEventType, DEFAULT_MAPPING

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def make_event(x, y, name="Simple pass", result="", match="m1", player="p1", team="t1",
               minute=10.0, half=1, attribute=""):
    raw = RawEventType.parse(name, result, attribute)
    cats = DEFAULT_MAPPING.categories(raw)
    return MatchEvent(match, player, team, minute, half, raw, cats[0] if cats else None,
                      PitchPoint(x, y), tuple(cats[1:]))


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test once per kernel backend."""
    if request.param == "numba" and not _accel.HAS_NUMBA:
        pytest.skip("numba not installed")
    old = _accel.get_backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(old)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one pass/fail line per criterion ----------------------

_criteria = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _criteria.setdefault(number, {"title": "", "passed": 0, "failed": 0, "skipped": 0})
    entry["title"] = entry["title"] or title
    if report.when == "call" or report.outcome != "passed":
        entry[report.outcome] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        args = marker.args
        outcome.get_result().criterion = (args[0], args[1] if len(args) > 1 else "")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "FAIL" if e["failed"] else "PASS" if e["passed"] and not e["skipped"] else "SKIP"
        total = e["passed"] + e["failed"] + e["skipped"]
        terminalreporter.write_line(
            f"criterion {number}: {status} ({e['passed']}/{total} tests passed) {e['title']}")

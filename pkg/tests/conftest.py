import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from evtbr import kernels  # noqa: E402
from evtbr.events import EventStream, SensorGeometry  # noqa: E402


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


def random_stream(rng, n, width=16, height=12, t_max=50_000, t0=0):
    t = np.sort(rng.integers(t0, t0 + t_max, n, dtype=np.uint64))
    x = rng.integers(0, width, n)
    y = rng.integers(0, height, n)
    p = np.where(rng.random(n) < 0.5, -1, 1)
    return EventStream(SensorGeometry(width, height), t, x, y, p)


@st.composite
def streams(draw, max_events=60, max_dim=8, max_t=20_000):
    width = draw(st.integers(1, max_dim))
    height = draw(st.integers(1, max_dim))
    n = draw(st.integers(0, max_events))
    t = sorted(draw(st.lists(st.integers(0, max_t), min_size=n, max_size=n)))
    x = draw(st.lists(st.integers(0, width - 1), min_size=n, max_size=n))
    y = draw(st.lists(st.integers(0, height - 1), min_size=n, max_size=n))
    p = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    return EventStream.from_events(SensorGeometry(width, height), zip(t, x, y, p))


_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")

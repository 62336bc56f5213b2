import json
import time

import pytest
from hypothesis import settings

from fxc.engine import run
from fxc.scenario import bundled_path, load_bundled

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def bench_doc():
    return json.loads(bundled_path().read_text())


@pytest.fixture(scope="session")
def bench_scenario():
    return load_bundled()


@pytest.fixture(scope="session")
def bench_trace(bench_scenario):
    """The full 20 s benchmark run at dt = 1e-3, shared across modules."""
    start = time.perf_counter()
    trace = run(bench_scenario)
    trace.metadata["wall_time"] = time.perf_counter() - start
    return trace


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

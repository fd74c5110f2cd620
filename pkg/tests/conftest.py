import numpy as np
import pytest

from demoshape import GridSpec, make_demo

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def spec10():
    return GridSpec(side=10)


@pytest.fixture
def spec5():
    return GridSpec(side=5)


@pytest.fixture
def demo5():
    return make_demo(GridSpec(side=5), "optimal")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record():
    """Log one acceptance line and hand back the verdict for the assert."""
    def _record(n, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return _record

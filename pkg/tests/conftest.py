import numpy as np
import pytest

from pcnls import Field, Grid

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per criterion for the terminal summary."""
    store = request.config.stash[ACCEPTANCE]

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        store[number] = f"[{status}] criterion {number:>2}: {title}: {detail}"

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def grid1():
    return Grid(1, 512, 20.0)


@pytest.fixture
def grid2():
    return Grid(2, 64, 12.0)


def random_field(rng, g: Grid, t: float = 0.0) -> Field:
    data = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    return Field(g, t, data)

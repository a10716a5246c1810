import hypothesis
import numpy as np
import pytest

from kinavg.spectral_core import make_grid

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("default", max_examples=20, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def gaussian(xs, vs):
    return np.exp(-sum(x * x for x in xs) - sum(v * v for v in vs))


@pytest.fixture(scope="session")
def grid_small():
    return make_grid(1, 64, 64, 8.0, 8.0)


@pytest.fixture(scope="session")
def grid_medium():
    return make_grid(1, 128, 128, 8.0, 8.0)


@pytest.fixture(scope="session")
def gaussian_small(grid_small):
    return grid_small.sample(gaussian)


@pytest.fixture(scope="session")
def gaussian_medium(grid_medium):
    return grid_medium.sample(gaussian)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from stablefair.core import Dataset


def make_dataset(n=12, dim=3, seed=0, num_groups=2):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dim))
    z = np.arange(n) % num_groups
    y = np.where(rng.random(n) < 0.5, 1, -1)
    return Dataset(X, z, y, num_groups)


@pytest.fixture
def small_ds():
    return make_dataset()


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

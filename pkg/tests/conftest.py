import numpy as np
import pytest

from localtimes.core import SamplePath, make_grid


@pytest.fixture
def linear_path():
    """X_s = s on [0, 1]."""
    grid = make_grid(0.0, 1.0, 4096)
    return SamplePath(grid, grid.points)


@pytest.fixture
def constant_path():
    """X_s = 0.3 on [0, 1]."""
    grid = make_grid(0.0, 1.0, 256)
    return SamplePath(grid, np.full(257, 0.3))


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects the one-line verdicts printed by the acceptance suite."""
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from beltrami.grid import Grid

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

DATA = Path(__file__).parent / "data"

# acceptance verdicts collected while the suite runs, echoed in the summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def data_dir():
    return DATA


def box(lo, hi, n, coords="cartesian"):
    dims = n if isinstance(n, tuple) else (n, n, n)
    return Grid.box(lo, hi, dims, coords)


def slope(coarse, fine):
    """Observed order between two grids whose spacing halves."""
    return float(np.log2(coarse / fine))


@pytest.fixture
def unit_box():
    return box((0, 0, 0), (1, 1, 1), 17)

import functools
import math

import pytest
from hypothesis import settings

from leoscatter import EllipsoidAxes, solve_elevation

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SWEEP_DEGREES = (0, 15, 30, 45, 60, 75, 90)


@functools.lru_cache(maxsize=None)
def solved(elevation_deg):
    """Default-schedule geometry (H = 65 m, ratio 0.6), cached across tests."""
    return solve_elevation(elevation_deg)


@pytest.fixture
def sphere():
    return EllipsoidAxes(1.0, 1.0, 1.0)


def radians(deg):
    return math.radians(deg)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

"""Shared tables.

All fixtures are session-scoped: tables are immutable and building the
smooth ones runs a periodic spline fit we don't want to repeat per test.
"""

import numpy as np
import pytest

from billiards import build_polygon, build_smooth_curve


@pytest.fixture(scope="session")
def square():
    # normalizes to perimeter 1, i.e. side 1/4 with a corner at param 0
    return build_polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


@pytest.fixture(scope="session")
def circle():
    th = 2.0 * np.pi * np.arange(128) / 128
    r = 1.0 / (2.0 * np.pi)  # unit perimeter before normalization too
    return build_smooth_curve(np.stack([r * np.cos(th), r * np.sin(th)], axis=1))


@pytest.fixture(scope="session")
def ellipse():
    th = 2.0 * np.pi * np.arange(128) / 128
    return build_smooth_curve(np.stack([2.0 * np.cos(th), np.sin(th)], axis=1))

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from warpbench.data import TimeSeries


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_series(rng, length, channels=1, scale=1.0):
    return TimeSeries(scale * rng.standard_normal((length, channels)))


def bump_series(length, center, width=3.0, amplitude=1.0, channels=1):
    """A Gaussian bump, the workhorse synthetic shape for alignment tests."""
    t = np.arange(length, dtype=np.float64)
    values = amplitude * np.exp(-0.5 * ((t - center) / width) ** 2)
    return TimeSeries(np.repeat(values[:, None], channels, axis=1))

import numpy as np
import pytest

from pushproc.raster import BAND_COUNT, RawScene


def make_scene(seed=0, width=32, lines=16, bit_depth=8, t0=1_525_487_400.0,
               period=0.002):
    rng = np.random.default_rng(seed)
    planes = rng.integers(0, (1 << bit_depth), (BAND_COUNT, lines, width), dtype=np.uint16)
    times = t0 + np.arange(lines) * period
    return RawScene(planes, times, bit_depth)


@pytest.fixture
def small_scene():
    return make_scene()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

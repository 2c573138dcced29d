import numpy as np
import pytest
from hypothesis import settings

from grushin_drift.core import Dimensions, GrushinPoint

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def dims11():
    return Dimensions(1, 1)


def random_point(rng, dims, scale=1.5):
    return GrushinPoint(rng.uniform(-scale, scale, dims.n), rng.uniform(-scale, scale, dims.m))

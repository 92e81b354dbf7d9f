import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twistorlab.twistor import standard_structure

settings.register_profile(
    "twistorlab", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("twistorlab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def j4():
    return standard_structure(4)


def s2_frame_matrices():
    j = standard_structure(4)
    i = np.zeros((4, 4))
    i[2, 0], i[0, 2], i[3, 1], i[1, 3] = 1.0, -1.0, -1.0, 1.0
    return j, i, i @ j

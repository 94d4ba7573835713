import numpy as np
import pytest

from rulasim.channel import RfConfig


@pytest.fixture
def rf():
    return RfConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sgplate.geometry import Disk, RoundedRectangle
from sgplate.material import MaterialField

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def unit_material():
    return MaterialField(mu=1, lam=1)


@pytest.fixture(scope="session")
def disk():
    return Disk(1.0)


@pytest.fixture(scope="session")
def rectangle():
    return RoundedRectangle(1.0, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

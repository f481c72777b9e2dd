import pytest
from hypothesis import HealthCheck, settings

from nozzleflow import GasConstants

settings.register_profile("default", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def gas():
    return GasConstants(5.0 / 3.0)

import pytest
from hypothesis import HealthCheck, settings

from catkit.fock import make_space

settings.register_profile(
    "catkit", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("catkit")


@pytest.fixture(scope="session")
def space():
    return make_space(64)


@pytest.fixture(scope="session")
def space128():
    return make_space(128)

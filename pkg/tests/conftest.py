import pytest

from adaptivebgm import default_volume_map
from adaptivebgm.fixtures import generate_stems


@pytest.fixture(scope="session")
def stems():
    """Full-length synthetic stem bank shared across tests."""
    return generate_stems(seed=0)


@pytest.fixture(scope="session")
def short_stems():
    """Small bank (0.2 s) for tests that only need a little audio."""
    return generate_stems(seed=1, duration_seconds=0.2)


@pytest.fixture(scope="session")
def vmap():
    return default_volume_map()

import pytest

from caoi import CiProfile, EnergyModel, builtin_profile_si2024


@pytest.fixture(scope="session")
def energy():
    return EnergyModel()


@pytest.fixture(scope="session")
def builtin():
    return builtin_profile_si2024()


@pytest.fixture()
def flat_profile():
    return CiProfile.constant(198.0, 12 * 30 * 86400.0)

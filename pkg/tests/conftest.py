import pytest

from nscert.constants import cached_constant
from nscert.semigroup import navier_stokes_estimator


@pytest.fixture(scope="session")
def estimator():
    return navier_stokes_estimator()


@pytest.fixture(scope="session")
def k2():
    return cached_constant(2.0, 3)


@pytest.fixture(scope="session")
def k4():
    return cached_constant(4.0, 3)

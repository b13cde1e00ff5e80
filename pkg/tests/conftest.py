import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

from lcqft.spacetime import LatticeSpacetime, MassSpectrum


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def massive_spacetime():
    """Two species of mass 1 on an 8-site circle."""
    return LatticeSpacetime(8, 16, 0.5, MassSpectrum.parse("1:2"))


@pytest.fixture
def mixed_spacetime():
    """One massless and two massive species."""
    return LatticeSpacetime(8, 16, 0.5, MassSpectrum.parse("0:1,1:2"))


@pytest.fixture
def two_block_spacetime():
    return LatticeSpacetime(8, 16, 0.5, MassSpectrum.parse("1:2,2:3"))

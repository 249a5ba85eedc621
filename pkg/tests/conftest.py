import numpy as np
import pytest
from hypothesis import settings

from replicator4 import canonical_matrix

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def MI():
    return canonical_matrix("I")


@pytest.fixture(scope="session")
def MII():
    return canonical_matrix("II")


@pytest.fixture(scope="session")
def MIII():
    return canonical_matrix("III")


@pytest.fixture(scope="session")
def MIV():
    return canonical_matrix("IV")


@pytest.fixture(scope="session")
def MV():
    return canonical_matrix("V")


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from sarplan import default_params, derive_constants


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def consts(params):
    return derive_constants(params.radar, params.comm, params.mission)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260823)

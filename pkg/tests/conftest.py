import numpy as np
import pytest

from ddfracture.core import TABLE1, nondimensionalize
from ddfracture.specimen import MachineCoupling, StandardDCB


@pytest.fixture(scope="session")
def table1():
    params, dT = nondimensionalize(TABLE1)
    return params, dT


@pytest.fixture(scope="session")
def dcb(table1):
    return StandardDCB(table1[0])


@pytest.fixture(scope="session")
def coupling(table1):
    return MachineCoupling.from_params(table1[0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from feasor.sets import Hyperplane


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def xaxis():
    return Hyperplane([0, 1], 0, name="y=0")


@pytest.fixture
def diag():
    return Hyperplane([1, -1], 0, name="y=x")

import numpy as np
import pytest

from siegel_kernel_lab import enumeration as en


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def cache_l2():
    return en.bfs_enumerate(2, L=2)


@pytest.fixture(scope="session")
def cache_l3():
    return en.bfs_enumerate(2, L=3)

import numpy as np
import pytest

from gpplab import gaussian_kernel, laplace_kernel


@pytest.fixture(scope="session")
def laplace():
    return laplace_kernel()


@pytest.fixture(scope="session")
def gaussian():
    return gaussian_kernel()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240711)

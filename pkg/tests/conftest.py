import numpy as np
import pytest

from kp5.dispersion import DispersionParams
from kp5.lattice import FrequencyLattice


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_lattice():
    return FrequencyLattice(16, 16, 2 * np.pi, 2 * np.pi)


@pytest.fixture
def kp1():
    return DispersionParams(alpha=1.0, beta=1.0)

import os

import numpy as np
import pytest

from data_structures.spin_chain import ChainConfig

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def repo_root():
    return REPO_ROOT


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def chain8():
    return ChainConfig(num_spins=8)


@pytest.fixture
def chain12():
    return ChainConfig(num_spins=12)

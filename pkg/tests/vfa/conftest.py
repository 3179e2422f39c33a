"""Shared fixtures for value function tests."""

import numpy as np
import pytest

from ghostkitchen.vfa import ValueNetwork
from tests.core import Batch


@pytest.fixture
def small_network() -> ValueNetwork:
    """Randomly initialized 21-8-1 network."""
    return ValueNetwork.initialize(np.random.default_rng(3), (21, 8, 1))


@pytest.fixture
def batch() -> Batch:
    """Sixteen random feature rows with targets."""
    rng = np.random.default_rng(4)
    return rng.normal(size=(16, 21)), rng.normal(size=16)

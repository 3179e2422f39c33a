"""Shared fixtures for solver tests."""

import numpy as np
import pytest

from ghostkitchen.model import Facility, Order, State
from ghostkitchen.oracle import AtpInstance, random_atp_instance
from tests.core import fifo_state


@pytest.fixture(scope="session")
def atp_instances() -> list[AtpInstance]:
    """Thirty small random instances with pinned history."""
    rng = np.random.default_rng(2024)
    return [random_atp_instance(rng) for _ in range(30)]


@pytest.fixture
def busy_state(short_day: list[Order], desk_facility: Facility) -> State:
    """Ninth decision point of the short day, planned by FIFO so far."""
    return fifo_state(short_day, desk_facility, 8)

"""Shared fixtures for ghostkitchen tests."""

import numpy as np
import pytest

from ghostkitchen.config import Scenario
from ghostkitchen.instances import build_facility, preset, sample_scenario_day
from ghostkitchen.model import Facility, Order


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk() -> Scenario:
    """Two restaurants, two cooks, two vehicles."""
    return preset("desk")


@pytest.fixture(scope="session")
def desk_facility(desk: Scenario) -> Facility:
    return build_facility(desk)


@pytest.fixture(scope="session")
def desk_day(desk: Scenario, desk_facility: Facility) -> list[Order]:
    """One sampled desk day, the same in every test."""
    return sample_scenario_day(desk, desk_facility, np.random.default_rng(7))


@pytest.fixture(scope="session")
def short_day(desk_day: list[Order]) -> list[Order]:
    """The first dozen orders of the desk day."""
    return desk_day[:12]

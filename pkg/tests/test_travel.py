import json
from pathlib import Path

import numpy as np
import pytest

from ghostkitchen.config import ServiceTimeConfig
from ghostkitchen.errors import ConfigError, UnknownLocationError
from ghostkitchen.travel import (
    KITCHEN,
    Location,
    TravelMode,
    TravelTimeProvider,
    Zone,
    load_matrix,
    square_pool,
)

# =============================================================================
# Euclidean metric
# =============================================================================


def test_kitchen_to_itself_is_zero() -> None:
    """Self-distance is zero under both metrics."""
    euclid = TravelTimeProvider.euclidean([Location(1, 3.0, 4.0)])
    matrix = TravelTimeProvider.from_matrix([0, 1], [[5.0, 2.0], [2.0, 5.0]])
    assert euclid.travel_time(KITCHEN, KITCHEN) == 0.0
    assert matrix.travel_time(KITCHEN, KITCHEN) == 0.0


def test_euclidean_distance_over_speed() -> None:
    """(0,0) to (3,4) at 0.5 km per minute takes 10 minutes."""
    customer = Location(1, 3.0, 4.0)
    travel = TravelTimeProvider.euclidean([customer], speed=0.5)
    assert travel.travel_time(KITCHEN, customer) == pytest.approx(10.0)
    assert travel.from_kitchen(customer) == pytest.approx(10.0)
    assert travel.mode is TravelMode.EUCLIDEAN_SPEED


def test_euclidean_rejects_kitchen_id() -> None:
    """Id 0 cannot be used for a customer."""
    with pytest.raises(ValueError, match="reserved"):
        TravelTimeProvider.euclidean([Location(0, 1.0, 1.0)])


def test_euclidean_rejects_bad_speed() -> None:
    """Speed must be positive."""
    with pytest.raises(ValueError, match="speed"):
        TravelTimeProvider.euclidean([], speed=0.0)


def test_location_validation() -> None:
    """Negative ids and non-finite coordinates are rejected."""
    with pytest.raises(ValueError):
        Location(-1, 0.0, 0.0)
    with pytest.raises(ValueError):
        Location(1, float("nan"), 0.0)


def test_unknown_location() -> None:
    """Lookups of unregistered ids raise UnknownLocationError."""
    travel = TravelTimeProvider.euclidean([Location(1, 1.0, 0.0)])
    with pytest.raises(UnknownLocationError) as info:
        travel.travel_time(KITCHEN, Location(9, 1.0, 1.0))
    assert info.value.location_id == 9
    with pytest.raises(LookupError):
        travel.location(9)


def test_registered_coordinates_win() -> None:
    """A location is measured where it is registered, whatever it carries."""
    travel = TravelTimeProvider.euclidean([Location(1, 3.0, 4.0)], speed=0.5)
    moved = Location(1, 30.0, 40.0)
    assert travel.from_kitchen(moved) == pytest.approx(10.0)
    assert travel.travel_time(moved, KITCHEN) == pytest.approx(10.0)


def test_customers_in_id_order() -> None:
    """customers() excludes the kitchen and sorts by id."""
    travel = TravelTimeProvider.euclidean([Location(3, 1.0, 0.0), Location(2, 0.0, 1.0)])
    assert [c.id for c in travel.customers()] == [2, 3]


# =============================================================================
# Explicit matrix
# =============================================================================


def test_matrix_passthrough() -> None:
    """Entries of a loaded 3x3 matrix are returned unchanged."""
    minutes = [[0.0, 4.0, 6.0], [4.5, 0.0, 7.2], [6.0, 7.0, 0.0]]
    travel = TravelTimeProvider.from_matrix([0, 1, 2], minutes)
    a, b = travel.location(1), travel.location(2)
    assert travel.travel_time(a, b) == 7.2
    assert travel.travel_time(b, a) == 7.0
    assert travel.from_kitchen(a) == 4.0


def test_matrix_diagonal_is_zeroed() -> None:
    """A nonzero diagonal entry does not make a self-trip cost time."""
    travel = TravelTimeProvider.from_matrix([0, 1], [[3.0, 1.0], [1.0, 3.0]])
    here = travel.location(1)
    assert travel.travel_time(here, here) == 0.0


@pytest.mark.parametrize(
    ("ids", "minutes", "message"),
    [
        ([0, 1], [[0.0, 1.0, 2.0], [1.0, 0.0, 2.0]], "square"),
        ([0, 1, 2], [[0.0, 1.0], [1.0, 0.0]], "header"),
        ([1, 0], [[0.0, 1.0], [1.0, 0.0]], "kitchen"),
        ([0, 1], [[0.0, -1.0], [1.0, 0.0]], "non-negative"),
        ([0, 0], [[0.0, 1.0], [1.0, 0.0]], "duplicate"),
    ],
)
def test_matrix_rejects_malformed(
    ids: list[int], minutes: list[list[float]], message: str
) -> None:
    """Malformed matrices raise ConfigError naming the problem."""
    with pytest.raises(ConfigError, match=message):
        TravelTimeProvider.from_matrix(ids, minutes)


def test_load_matrix_text(tmp_path: Path) -> None:
    """Whitespace text: header of ids, then one row per id."""
    path = tmp_path / "minutes.txt"
    path.write_text("0 5 9\n0 3 4\n3 0 2.5\n4 2.5 0\n")
    travel = load_matrix(path)
    assert travel.mode is TravelMode.EXPLICIT_MATRIX
    assert travel.travel_time(travel.location(5), travel.location(9)) == 2.5
    assert [c.id for c in travel.customers()] == [5, 9]


def test_load_matrix_json_with_zones(tmp_path: Path) -> None:
    """JSON matrices may tag customers with zones."""
    path = tmp_path / "minutes.json"
    path.write_text(
        json.dumps(
            {
                "ids": [0, 1, 2],
                "minutes": [[0, 3, 4], [3, 0, 5], [4, 5, 0]],
                "zones": {"1": "inner_city"},
            }
        )
    )
    travel = load_matrix(path)
    assert travel.location(1).zone is Zone.INNER_CITY
    assert travel.location(2).zone is Zone.RESIDENTIAL


def test_load_matrix_errors(tmp_path: Path) -> None:
    """Missing, empty and garbled files raise ConfigError."""
    with pytest.raises(ConfigError, match="cannot read"):
        load_matrix(tmp_path / "absent.txt")
    empty = tmp_path / "empty.txt"
    empty.write_text("\n")
    with pytest.raises(ConfigError, match="empty"):
        load_matrix(empty)
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        load_matrix(garbled)


# =============================================================================
# Pool and service times
# =============================================================================


def test_square_pool_zones() -> None:
    """Nodes within the central square are inner city, the rest residential."""
    pool = square_pool(300, 11, area_km=12.0, inner_km=4.0)
    assert len(pool) == 300
    assert [loc.id for loc in pool] == list(range(1, 301))
    for loc in pool:
        assert max(abs(loc.x), abs(loc.y)) <= 6.0
        inner = max(abs(loc.x), abs(loc.y)) <= 2.0
        assert (loc.zone is Zone.INNER_CITY) == inner
    assert square_pool(300, 11, area_km=12.0, inner_km=4.0) == pool


def test_service_time_deterministic_under_seed() -> None:
    """The same seed draws the same positive service time."""
    travel = TravelTimeProvider.euclidean([])
    first = travel.sample_service_time(np.random.default_rng(3))
    second = travel.sample_service_time(np.random.default_rng(3))
    assert first > 0
    assert first == second


def test_service_time_degenerate() -> None:
    """Zero sigma gives the constant exp(mu)."""
    service = ServiceTimeConfig(mu=2.5, sigma=0.0)
    travel = TravelTimeProvider.euclidean([], service=service)
    rng = np.random.default_rng(0)
    draws = [travel.sample_service_time(rng) for _ in range(5)]
    assert draws == [pytest.approx(2.5)] * 5


def test_service_time_median() -> None:
    """The empirical median matches exp(mu) of the underlying normal within 10%."""
    service = ServiceTimeConfig(mu=2.5, sigma=1.5, cap=None)
    mu, _ = service.log_params()
    rng = np.random.default_rng(1)
    samples = [service.sample(rng) for _ in range(10_000)]
    assert float(np.median(samples)) == pytest.approx(np.exp(mu), rel=0.1)


def test_service_time_cap() -> None:
    """Draws never exceed the cap."""
    service = ServiceTimeConfig(mu=5.0, sigma=5.0, cap=6.0)
    rng = np.random.default_rng(2)
    assert max(service.sample(rng) for _ in range(2000)) <= 6.0

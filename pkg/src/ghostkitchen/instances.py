"""Instance generation: presets, daily order sampling and day files."""

from __future__ import annotations

import logging
import math
import typing as ty
from collections.abc import Callable, Mapping
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from ghostkitchen.config import (
    CookSharing,
    DemandConfig,
    GeoConfig,
    PrepTimeConfig,
    ProblemConfig,
    RunConfig,
    Scenario,
)
from ghostkitchen.errors import ConfigError
from ghostkitchen.model import Facility, Order
from ghostkitchen.travel import Location, TravelTimeProvider, Zone, load_matrix, square_pool

logger = logging.getLogger(__name__)

_MAX_REDRAWS = 1000


# =============================================================================
# Presets
# =============================================================================


def _small() -> Scenario:
    return Scenario(name="small")


def _medium() -> Scenario:
    base = _small()
    return base.overlay({"name": "medium", "demand": base.demand.scaled(1.25).model_dump()})


def _large() -> Scenario:
    return Scenario(
        name="large",
        problem=ProblemConfig(cooks_per_type=(2,) * 5, fleet_size=10),
        demand=DemandConfig(mu_lunch=160.0, mu_dinner=250.0),
    )


def _large_variant(name: str, **changes: ty.Any) -> Callable[[], Scenario]:
    def build() -> Scenario:
        base = _large()
        problem = base.problem.overlay(changes.get("problem", {}))
        demand = base.demand.scaled(changes.get("demand_factor", 1.0))
        prep = base.prep.scaled_std(changes.get("prep_std_factor", 1.0))
        return base.overlay(
            {
                "name": name,
                "problem": problem.model_dump(),
                "demand": demand.model_dump(),
                "prep": prep.model_dump(),
            }
        )

    return build


def _desk() -> Scenario:
    """Two restaurants, one cook each, two vehicles, about 41 orders a day."""
    return Scenario(
        name="desk",
        problem=ProblemConfig(
            freshness=(20.0, 20.0), cooks_per_type=(1, 1), fleet_size=2
        ),
        demand=DemandConfig(mu_lunch=16.0, mu_dinner=25.0, restaurants=2),
        prep=PrepTimeConfig(mean=(9.0, 7.0), std=(1.4, 1.2)),
    )


def _desk_large() -> Scenario:
    base = _desk()
    return base.overlay(
        {
            "name": "desk-large",
            "problem": base.problem.overlay(
                {"cooks_per_type": (2, 2), "fleet_size": 4}
            ).model_dump(),
            "demand": base.demand.scaled(2.0).model_dump(),
        }
    )


def _cooks_none() -> Scenario:
    base = _large()
    return base.overlay(
        {
            "name": "large-cooks-none",
            "problem": {"freshness": (20.0,) * 10, "cooks_per_type": (1,) * 10},
            "sharing": CookSharing.NONE,
        }
    )


def _cooks_full() -> Scenario:
    base = _large()
    return base.overlay(
        {
            "name": "large-cooks-full",
            "problem": {"freshness": (20.0,), "cooks_per_type": (10,)},
            "sharing": CookSharing.FULL,
        }
    )


PRESETS: Mapping[str, Callable[[], Scenario]] = {
    "small": _small,
    "medium": _medium,
    "large": _large,
    "l1": _large_variant("l1", problem={"freshness": (15.0,) * 5}),
    "l2": _large_variant("l2", problem={"freshness": (25.0,) * 5}),
    "l3": _large_variant("l3", problem={"promise": 25.0}),
    "l4": _large_variant("l4", problem={"promise": 35.0}),
    "l5": _large_variant("l5", problem={"cooks_per_type": (1,) * 5}),
    "l6": _large_variant("l6", problem={"cooks_per_type": (3,) * 5}),
    "l7": _large_variant("l7", problem={"fleet_size": 7}),
    "l8": _large_variant("l8", problem={"fleet_size": 13}),
    "l9": _large_variant("l9", prep_std_factor=0.0),
    "l10": _large_variant("l10", prep_std_factor=2.0),
    "l11": _large_variant("l11", demand_factor=0.9),
    "l12": _large_variant("l12", demand_factor=1.1),
    "desk": _desk,
    "desk-large": _desk_large,
    "large-cooks-none": _cooks_none,
    "large-cooks-full": _cooks_full,
}


def preset(name: str) -> Scenario:
    """Named scenario; names are case-insensitive (``Small``, ``L7``)."""
    try:
        build = PRESETS[name.lower()]
    except KeyError:
        known = ", ".join(PRESETS)
        raise ConfigError(f"unknown preset {name!r} (known: {known})") from None
    return build()


def resolve_scenario(run: RunConfig, preset_name: str | None = None) -> Scenario:
    """Preset overlaid with the run config's sections."""
    base = preset(preset_name or run.preset)
    try:
        return base.overlay(
            {
                "problem": base.problem.overlay(run.problem).model_dump(),
                "demand": base.demand.overlay(run.demand).model_dump(),
                "prep": base.prep.overlay(run.prep).model_dump(),
                "geo": base.geo.overlay(run.geo).model_dump(),
            }
        )
    except ValidationError as exc:
        raise ConfigError(f"invalid overrides for preset {base.name}: {exc}") from exc


def build_facility(scenario: Scenario) -> Facility:
    geo: GeoConfig = scenario.geo
    if geo.matrix_path is not None:
        travel = load_matrix(geo.matrix_path, service=geo.service)
    else:
        demand = scenario.demand
        pool = square_pool(
            demand.pool_size, demand.pool_seed, demand.area_km, demand.inner_km
        )
        travel = TravelTimeProvider.euclidean(pool, speed=geo.speed, service=geo.service)
    return Facility(scenario.problem, travel)


# =============================================================================
# Sampling
# =============================================================================


def _sample_time(
    peak: float, spread: float, horizon: float, rng: np.random.Generator
) -> float:
    """Normal order time, redrawn until it falls in [0, horizon]."""
    for _ in range(_MAX_REDRAWS):
        value = float(rng.normal(peak, spread)) if spread > 0 else peak
        if 0.0 <= value <= horizon:
            return value
    return min(max(peak, 0.0), horizon)


def _food_type(
    restaurant: int, sharing: CookSharing, n_types: int, n_restaurants: int,
    rng: np.random.Generator,
) -> int:
    match sharing:
        case CookSharing.RESTAURANT:
            return restaurant
        case CookSharing.FULL:
            return 0
        case CookSharing.NONE:
            per_restaurant = n_types // n_restaurants
            return restaurant * per_restaurant + int(rng.integers(per_restaurant))


def sample_day(
    demand: DemandConfig,
    prep: PrepTimeConfig,
    rng: np.random.Generator,
    *,
    facility: Facility,
    sharing: CookSharing = CookSharing.RESTAURANT,
) -> list[Order]:
    """Sample one day of orders, sorted by placement time.

    Locations near the lunch peak lean to the inner city, near the dinner
    peak to residential areas. A location is redrawn when the direct drive
    plus its stop time cannot meet the tightest freshness limit.
    """
    pool = facility.travel.customers()
    if not pool:
        raise ConfigError("customer location pool is empty")
    config = facility.config
    horizon = config.capture_horizon
    tightest = min(config.freshness)

    def draw_count(mu: float) -> int:
        return max(0, round(float(rng.normal(mu, mu * demand.sigma_ratio))))

    n_lunch, n_dinner = draw_count(demand.mu_lunch), draw_count(demand.mu_dinner)
    times = [
        _sample_time(demand.lunch_peak, demand.lunch_spread, horizon, rng)
        for _ in range(n_lunch)
    ] + [
        _sample_time(demand.dinner_peak, demand.dinner_spread, horizon, rng)
        for _ in range(n_dinner)
    ]
    times.sort()

    def uniform_location() -> Location:
        return pool[int(rng.integers(len(pool)))]

    orders: list[Order] = []
    for order_id, t_order in enumerate(times):
        restaurant = int(rng.integers(demand.restaurants))
        location = uniform_location()
        lunch_side = rng.random() < (demand.resample_pivot - t_order) / demand.resample_span
        inner = location.zone is Zone.INNER_CITY
        if (lunch_side != inner) and rng.random() < demand.resample_rate:
            location = uniform_location()
        t_prep = prep.sample(restaurant, rng)
        service = facility.travel.sample_service_time(rng)
        stop = service if config.service_in_arrival else 0.0
        for _ in range(_MAX_REDRAWS):
            if facility.travel.from_kitchen(location) + stop <= tightest:
                break
            location = uniform_location()
        else:
            raise ConfigError("no customer location can be served fresh")
        food_type = _food_type(
            restaurant, sharing, config.n_food_types, demand.restaurants, rng
        )
        orders.append(
            Order(order_id, food_type, t_order, t_prep, location, service)
        )
    logger.debug("sampled %d lunch and %d dinner orders", n_lunch, n_dinner)
    return orders


def sample_scenario_day(
    scenario: Scenario, facility: Facility, rng: np.random.Generator
) -> list[Order]:
    return sample_day(
        scenario.demand, scenario.prep, rng, facility=facility, sharing=scenario.sharing
    )


def day_rngs(seed: int, n_days: int) -> list[np.random.Generator]:
    """Independent generator per day, derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(n_days)
    return [np.random.default_rng(child) for child in children]


def sample_days(scenario: Scenario, facility: Facility, seed: int, n_days: int) -> list[list[Order]]:
    return [sample_scenario_day(scenario, facility, rng) for rng in day_rngs(seed, n_days)]


# =============================================================================
# Day files
# =============================================================================


class DayFile(BaseModel):
    """One sampled day, replayable by every policy."""

    model_config = ConfigDict(frozen=True)

    scenario: str
    day: int
    seed: int
    orders: list[Order]


def write_day(path: Path, day: DayFile) -> None:
    path.write_text(day.model_dump_json(indent=1) + "\n")


def read_day(path: Path) -> DayFile:
    try:
        return DayFile.model_validate_json(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read day file: {exc.strerror}", source=path) from exc
    except ValidationError as exc:
        raise ConfigError(f"malformed day file: {exc}", source=path) from exc


def check_day(orders: list[Order], facility: Facility) -> None:
    """Reject days whose locations are unknown to the facility's network."""
    for order in orders:
        facility.travel.location(order.location.id)
        if not 0 <= order.food_type < facility.config.n_food_types:
            raise ConfigError(f"order {order.id} has unknown food type {order.food_type}")
        if math.isnan(order.t_order):
            raise ConfigError(f"order {order.id} has no placement time")

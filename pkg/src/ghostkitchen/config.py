"""Validated configuration models.

Every tunable of a run lives in one of these frozen pydantic models. Presets
(instances.py) build them; a RunConfig file overlays them; CLI flags overlay
the file.
"""

from __future__ import annotations

import json
import math
import tomllib
import typing as ty
from enum import StrEnum
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ghostkitchen._defaults import DEFAULT_SEED
from ghostkitchen.errors import ConfigError


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def overlay(self, updates: ty.Mapping[str, ty.Any]) -> ty.Self:
        """Return a validated copy with the given fields replaced."""
        if not updates:
            return self
        merged = self.model_dump()
        for key, value in updates.items():
            current = merged.get(key)
            if isinstance(current, dict) and isinstance(value, dict):
                merged[key] = {**current, **value}
            else:
                merged[key] = value
        return type(self).model_validate(merged)


# =============================================================================
# Log-normal parameterisation
# =============================================================================


class Interpretation(StrEnum):
    """How a (first, second) log-normal parameter pair is read."""

    MOMENTS = "moments"
    """Mean and standard deviation of the distribution, in minutes."""
    LOG = "log"
    """Mean and standard deviation of the underlying normal."""


def lognormal_params(
    first: float, second: float, interpretation: Interpretation
) -> tuple[float, float]:
    """Return (mu, sigma) of the underlying normal."""
    match interpretation:
        case Interpretation.LOG:
            return first, second
        case Interpretation.MOMENTS:
            sigma2 = math.log1p((second / first) ** 2)
            return math.log(first) - sigma2 / 2, math.sqrt(sigma2)


class ServiceTimeConfig(_Frozen):
    """Per-stop parking and address search time."""

    mu: float = 2.5
    sigma: float = Field(default=1.5, ge=0)
    interpretation: Interpretation = Interpretation.MOMENTS
    cap: float | None = Field(default=10.0, gt=0)

    @model_validator(mode="after")
    def _check(self) -> ty.Self:
        if self.interpretation is Interpretation.MOMENTS and self.mu <= 0:
            raise ValueError("service time mean must be positive")
        return self

    def log_params(self) -> tuple[float, float]:
        return lognormal_params(self.mu, self.sigma, self.interpretation)

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one service time in minutes, truncated at the cap."""
        mu, sigma = self.log_params()
        value = float(rng.lognormal(mu, sigma)) if sigma > 0 else math.exp(mu)
        if self.cap is not None:
            value = min(value, self.cap)
        return value


# =============================================================================
# Problem, demand, preparation, geography
# =============================================================================


class ProblemConfig(_Frozen):
    """Resources and service levels of one ghost kitchen."""

    freshness: tuple[float, ...] = (20.0,) * 5
    """delta_f per food type, minutes from ready to door."""
    cooks_per_type: tuple[int, ...] = (1,) * 5
    fleet_size: int = Field(default=5, ge=1)
    capacity: int = Field(default=3, ge=1)
    promise: float = Field(default=30.0, gt=0)
    """tau: promised click-to-door minutes."""
    capture_horizon: float = Field(default=1440.0, gt=0)
    operation_horizon: float = 1560.0
    service_in_arrival: bool = True
    """Count stop service times in arrival times for delay and freshness."""

    @model_validator(mode="after")
    def _check(self) -> ty.Self:
        if self.operation_horizon <= self.capture_horizon:
            raise ValueError("operation horizon must exceed capture horizon")
        if len(self.freshness) != len(self.cooks_per_type):
            raise ValueError("freshness and cooks_per_type disagree on food types")
        if not self.freshness:
            raise ValueError("at least one food type is required")
        if any(delta <= 0 for delta in self.freshness):
            raise ValueError("freshness limits must be positive")
        if any(count < 1 for count in self.cooks_per_type):
            raise ValueError("every food type needs at least one cook")
        return self

    @property
    def n_food_types(self) -> int:
        return len(self.freshness)

    @property
    def n_cooks(self) -> int:
        return sum(self.cooks_per_type)


class DemandConfig(_Frozen):
    """Daily demand: bimodal order counts and times, zone-aware locations."""

    mu_lunch: float = Field(default=64.0, gt=0)
    mu_dinner: float = Field(default=100.0, gt=0)
    sigma_ratio: float = Field(default=1 / 40, ge=0)
    lunch_peak: float = 720.0
    lunch_spread: float = Field(default=45.0, ge=0)
    dinner_peak: float = 1140.0
    dinner_spread: float = Field(default=60.0, ge=0)
    resample_rate: float = Field(default=0.5, ge=0, lt=1)
    resample_pivot: float = 1080.0
    resample_span: float = Field(default=360.0, gt=0)
    pool_size: int = Field(default=200, ge=0)
    pool_seed: int = 2024
    area_km: float = Field(default=12.0, gt=0)
    inner_km: float = Field(default=4.0, ge=0)
    restaurants: int = Field(default=5, ge=1)
    """Restaurants orders are drawn from, uniformly."""

    def scaled(self, factor: float) -> DemandConfig:
        return self.overlay(
            {"mu_lunch": self.mu_lunch * factor, "mu_dinner": self.mu_dinner * factor}
        )


class PrepTimeConfig(_Frozen):
    """Log-normal preparation time per restaurant."""

    mean: tuple[float, ...] = (10.0, 9.0, 8.0, 7.0, 6.0)
    std: tuple[float, ...] = (1.5, 1.4, 1.3, 1.2, 1.1)
    interpretation: Interpretation = Interpretation.MOMENTS

    @model_validator(mode="after")
    def _check(self) -> ty.Self:
        if len(self.mean) != len(self.std):
            raise ValueError("mean and std disagree on restaurants")
        if any(sigma < 0 for sigma in self.std):
            raise ValueError("preparation std must be non-negative")
        if self.interpretation is Interpretation.MOMENTS and any(
            mean <= 0 for mean in self.mean
        ):
            raise ValueError("preparation means must be positive")
        return self

    def log_params(self, restaurant: int) -> tuple[float, float]:
        return lognormal_params(
            self.mean[restaurant], self.std[restaurant], self.interpretation
        )

    def sample(self, restaurant: int, rng: np.random.Generator) -> float:
        mu, sigma = self.log_params(restaurant)
        return float(rng.lognormal(mu, sigma)) if sigma > 0 else math.exp(mu)

    def scaled_std(self, factor: float) -> PrepTimeConfig:
        return self.overlay({"std": tuple(sigma * factor for sigma in self.std)})


class GeoConfig(_Frozen):
    speed: float = Field(default=0.6, gt=0)
    """km per minute for the Euclidean metric."""
    matrix_path: Path | None = None
    """Precomputed travel-time matrix; replaces the Euclidean metric when set."""
    service: ServiceTimeConfig = ServiceTimeConfig()


class CookSharing(StrEnum):
    """Which cooks may prepare which orders."""

    RESTAURANT = "restaurant"
    """Cooks prepare their own restaurant's food."""
    NONE = "none"
    """Every cook is its own food type."""
    FULL = "full"
    """One food type: any cook prepares any order."""


class Scenario(_Frozen):
    """Everything needed to sample days and build a facility."""

    name: str = "custom"
    problem: ProblemConfig = ProblemConfig()
    demand: DemandConfig = DemandConfig()
    prep: PrepTimeConfig = PrepTimeConfig()
    geo: GeoConfig = GeoConfig()
    sharing: CookSharing = CookSharing.RESTAURANT

    @model_validator(mode="after")
    def _check(self) -> ty.Self:
        if len(self.prep.mean) != self.demand.restaurants:
            raise ValueError("one preparation distribution per restaurant required")
        n_types = self.problem.n_food_types
        restaurants = self.demand.restaurants
        match self.sharing:
            case CookSharing.RESTAURANT:
                valid = n_types == restaurants
            case CookSharing.FULL:
                valid = n_types == 1
            case CookSharing.NONE:
                valid = n_types % restaurants == 0 and all(
                    count == 1 for count in self.problem.cooks_per_type
                )
        if not valid:
            raise ValueError(
                f"{self.sharing.value} cook sharing does not fit {n_types} food "
                f"types over {restaurants} restaurants"
            )
        return self


# =============================================================================
# Solver, training and validation knobs
# =============================================================================


class LnsConfig(_Frozen):
    iterations: int = Field(default=70, ge=0)
    accept_probability: float = Field(default=0.7, ge=0, le=1)
    pdft_max_iter: int = Field(default=25, ge=0)


class TrainConfig(_Frozen):
    learning_rate: float = Field(default=1e-3, ge=0)
    batch_size: int = Field(default=128, ge=1)
    replay_capacity: int = Field(default=1_000_000, ge=1)
    episodes: int = Field(default=10_000, ge=0)
    fine_tune_episodes: int = Field(default=1_000, ge=0)
    hidden: tuple[int, ...] = (256, 256)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    lns_iterations: int = Field(default=70, ge=0)
    """LNS iterations per decision point while training (offline)."""
    steps_per_episode: int = Field(default=1, ge=1)
    convergence_window: int = Field(default=200, ge=1)
    convergence_tol: float = Field(default=0.01, ge=0)
    stop_on_convergence: bool = False


class OracleConfig(_Frozen):
    grid_step: float = Field(default=0.5, gt=0)
    refine_step: float = Field(default=0.1, gt=0)
    max_orders: int = Field(default=6, ge=1)
    max_trips: int = Field(default=4, ge=1)
    max_cooks_per_type: int = Field(default=2, ge=1)
    max_vehicles: int = Field(default=2, ge=1)
    max_space_orders: int = Field(default=5, ge=1)
    """Cap for the exhaustive partial-decision enumeration."""


# =============================================================================
# Run configuration file
# =============================================================================


class RunConfig(_Frozen):
    """One config file: a preset name plus partial overrides per section."""

    preset: str = "small"
    seed: int = DEFAULT_SEED
    problem: dict[str, ty.Any] = {}
    demand: dict[str, ty.Any] = {}
    prep: dict[str, ty.Any] = {}
    geo: dict[str, ty.Any] = {}
    lns: LnsConfig = LnsConfig()
    train: TrainConfig = TrainConfig()
    oracle: OracleConfig = OracleConfig()


def load_run_config(path: Path) -> RunConfig:
    """Read a RunConfig from a .json or .toml file."""
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=path) from exc
    try:
        match path.suffix.lower():
            case ".toml":
                data = tomllib.loads(raw.decode())
            case ".json":
                data = json.loads(raw)
            case other:
                raise ConfigError(f"unsupported config format {other!r}", source=path)
        return RunConfig.model_validate(data)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed config: {exc}", source=path) from exc
    except ValidationError as exc:
        raise ConfigError(str(exc), source=path) from exc

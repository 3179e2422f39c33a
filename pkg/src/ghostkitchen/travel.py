"""Travel times between the kitchen (location 0) and customers.

Two metrics: straight-line distance at constant speed, or an explicit
matrix of minutes loaded from disk.
"""

from __future__ import annotations

import dataclasses as dc
import functools
import json
import math
from collections.abc import Iterable, Mapping
from enum import StrEnum
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ghostkitchen.config import ServiceTimeConfig
from ghostkitchen.errors import ConfigError, UnknownLocationError

KITCHEN_ID = 0


class Zone(StrEnum):
    INNER_CITY = "inner_city"
    RESIDENTIAL = "residential"


@dc.dataclass(frozen=True, slots=True)
class Location:
    id: int
    x: float
    y: float
    zone: Zone = Zone.RESIDENTIAL

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"location id must be non-negative, got {self.id}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"location {self.id} has non-finite coordinates")


KITCHEN = Location(KITCHEN_ID, 0.0, 0.0, Zone.INNER_CITY)


class TravelMode(StrEnum):
    EUCLIDEAN_SPEED = "euclidean_speed"
    EXPLICIT_MATRIX = "explicit_matrix"


@dc.dataclass(frozen=True, eq=False)
class TravelTimeProvider:
    """Deterministic travel minutes between registered locations.

    Immutable once built, so parallel episodes can share one instance.
    """

    mode: TravelMode
    locations: Mapping[int, Location]
    speed: float = 0.6
    matrix: npt.NDArray[np.float64] | None = None
    index: Mapping[int, int] = dc.field(default_factory=dict[int, int])
    service: ServiceTimeConfig = ServiceTimeConfig()

    @classmethod
    def euclidean(
        cls,
        customers: Iterable[Location],
        *,
        speed: float = 0.6,
        service: ServiceTimeConfig | None = None,
    ) -> TravelTimeProvider:
        if speed <= 0:
            raise ValueError(f"speed must be positive, got {speed}")
        locations = {KITCHEN_ID: KITCHEN}
        for location in customers:
            if location.id == KITCHEN_ID:
                raise ValueError("location id 0 is reserved for the kitchen")
            locations[location.id] = location
        return cls(
            mode=TravelMode.EUCLIDEAN_SPEED,
            locations=locations,
            speed=speed,
            service=service or ServiceTimeConfig(),
        )

    @classmethod
    def from_matrix(
        cls,
        ids: Iterable[int],
        minutes: npt.ArrayLike,
        *,
        locations: Iterable[Location] = (),
        service: ServiceTimeConfig | None = None,
    ) -> TravelTimeProvider:
        """Build from a square matrix whose rows follow ``ids``.

        Locations without coordinates are registered at the origin; only
        their ids and zones matter in this mode.
        """
        id_list = list(ids)
        try:
            matrix = np.asarray(minutes, dtype=np.float64)
        except ValueError as exc:
            raise ConfigError(f"travel matrix is not rectangular: {exc}") from exc
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(f"travel matrix must be square, got {matrix.shape}")
        if matrix.shape[0] != len(id_list):
            raise ConfigError("travel matrix header does not match its rows")
        if not id_list or id_list[0] != KITCHEN_ID:
            raise ConfigError("first matrix row/column must be the kitchen (id 0)")
        if len(set(id_list)) != len(id_list):
            raise ConfigError("duplicate location ids in travel matrix")
        if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
            raise ConfigError("travel times must be finite and non-negative")
        matrix = matrix.copy()
        np.fill_diagonal(matrix, 0.0)
        matrix.setflags(write=False)

        known = {location.id: location for location in locations}
        registered = {KITCHEN_ID: KITCHEN}
        for location_id in id_list[1:]:
            registered[location_id] = known.get(location_id, Location(location_id, 0, 0))
        return cls(
            mode=TravelMode.EXPLICIT_MATRIX,
            locations=registered,
            matrix=matrix,
            index={location_id: row for row, location_id in enumerate(id_list)},
            service=service or ServiceTimeConfig(),
        )

    def location(self, location_id: int) -> Location:
        try:
            return self.locations[location_id]
        except KeyError:
            raise UnknownLocationError(location_id) from None

    def customers(self) -> tuple[Location, ...]:
        """Registered customer locations in id order."""
        return tuple(
            self.locations[key] for key in sorted(self.locations) if key != KITCHEN_ID
        )

    def travel_time(self, origin: Location, destination: Location) -> float:
        """Driving minutes from origin to destination.

        Both ends are resolved by id; the coordinates used are the registered
        ones, not those carried by the arguments.
        """
        origin = self.location(origin.id)
        destination = self.location(destination.id)
        if origin.id == destination.id:
            return 0.0
        match self.mode:
            case TravelMode.EUCLIDEAN_SPEED:
                distance = math.hypot(origin.x - destination.x, origin.y - destination.y)
                return distance / self.speed
            case TravelMode.EXPLICIT_MATRIX:
                assert self.matrix is not None
                row = self.index[origin.id]
                column = self.index[destination.id]
                return float(self.matrix[row, column])

    def from_kitchen(self, destination: Location) -> float:
        return self.travel_time(KITCHEN, destination)

    def sample_service_time(self, rng: np.random.Generator) -> float:
        return self.service.sample(rng)


# =============================================================================
# Location pool and matrix files
# =============================================================================


@functools.lru_cache(maxsize=16)
def square_pool(
    size: int, seed: int, area_km: float = 12.0, inner_km: float = 4.0
) -> tuple[Location, ...]:
    """Customer nodes uniform in a square centred on the kitchen.

    Nodes within the central ``inner_km`` square are inner city.
    """
    rng = np.random.default_rng(seed)
    half, inner = area_km / 2, inner_km / 2
    coords = rng.uniform(-half, half, size=(size, 2))
    pool: list[Location] = []
    for offset, (x, y) in enumerate(coords.tolist()):
        zone = Zone.INNER_CITY if max(abs(x), abs(y)) <= inner else Zone.RESIDENTIAL
        pool.append(Location(offset + 1, x, y, zone))
    return tuple(pool)


def load_matrix(
    path: Path, *, service: ServiceTimeConfig | None = None
) -> TravelTimeProvider:
    """Load a travel-time matrix from JSON or whitespace-separated text.

    JSON: ``{"ids": [0, ...], "minutes": [[...], ...], "zones": {"3": "inner_city"}}``.
    Text: a header row of ids followed by one row of minutes per id.
    """
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read travel matrix: {exc.strerror}", source=path) from exc

    zones: dict[int, Zone] = {}
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
            ids = [int(value) for value in data["ids"]]
            minutes = data["minutes"]
            zones = {int(key): Zone(value) for key, value in data.get("zones", {}).items()}
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed travel matrix: {exc}", source=path) from exc
    else:
        lines = [line.split() for line in text.splitlines() if line.strip()]
        if not lines:
            raise ConfigError("empty travel matrix", source=path)
        try:
            ids = [int(value) for value in lines[0]]
            minutes = [[float(value) for value in row] for row in lines[1:]]
        except ValueError as exc:
            raise ConfigError(f"malformed travel matrix: {exc}", source=path) from exc

    locations = [
        Location(location_id, 0.0, 0.0, zones.get(location_id, Zone.RESIDENTIAL))
        for location_id in ids
        if location_id != KITCHEN_ID
    ]
    return TravelTimeProvider.from_matrix(
        ids, minutes, locations=locations, service=service
    )

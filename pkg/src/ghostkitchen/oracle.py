"""Brute-force solvers for small instances.

``oracle_atp`` enumerates every cook and vehicle assignment of a partial
decision and solves the timing of each exactly as a system of difference
constraints. ``oracle_decision_space`` enumerates every partial decision of
a state. Neither shares code with the solver package; they exist to check
it.
"""

from __future__ import annotations

import dataclasses as dc
import itertools
import logging
import math
from collections.abc import Callable, Iterator, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from ghostkitchen._defaults import EPS
from ghostkitchen.config import OracleConfig, ProblemConfig
from ghostkitchen.errors import OracleCapError
from ghostkitchen.model import Facility, Order, Plan, State, Trip
from ghostkitchen.solver.partial import PartialDecision
from ghostkitchen.travel import Location, TravelTimeProvider

logger = logging.getLogger(__name__)


# =============================================================================
# Difference constraints
# =============================================================================


class DifferenceConstraints:
    """Least solution of ``x_b >= x_a + w`` constraints.

    Node 0 is the time origin. Longest paths from it give the least
    solution; a positive cycle means there is none.
    """

    def __init__(self) -> None:
        self.size = 1
        self.edges: list[tuple[int, int, float]] = []

    def var(self) -> int:
        self.size += 1
        return self.size - 1

    def at_least(self, x: int, value: float) -> None:
        self.edges.append((0, x, value))

    def at_most(self, x: int, value: float) -> None:
        self.edges.append((x, 0, -value))

    def pin(self, x: int, value: float) -> None:
        self.at_least(x, value)
        self.at_most(x, value)

    def after(self, a: int, b: int, gap: float = 0.0) -> None:
        self.edges.append((a, b, gap))

    def solve(self) -> list[float] | None:
        dist = [-math.inf] * self.size
        dist[0] = 0.0
        for _ in range(self.size):
            changed = False
            for a, b, weight in self.edges:
                if dist[a] == -math.inf:
                    continue
                if dist[a] + weight > dist[b] + EPS:
                    dist[b] = dist[a] + weight
                    changed = True
            if not changed:
                break
        else:
            return None
        if dist[0] > EPS:
            return None
        return dist


# =============================================================================
# ATP oracle
# =============================================================================


@dc.dataclass(frozen=True)
class OracleResult:
    feasible: bool
    delay: float = math.inf
    plan: Plan | None = None
    start_times: Mapping[int, float] = dc.field(default_factory=dict[int, float])
    departures: tuple[float, ...] = ()
    assignments: int = 0
    """Cook and vehicle assignments enumerated."""
    feasible_assignments: int = 0


def _check_caps(
    state: State, partial: PartialDecision, facility: Facility, config: OracleConfig
) -> None:
    if len(state.orders) > config.max_orders:
        raise OracleCapError("open orders", len(state.orders), config.max_orders)
    if len(partial.trips) > config.max_trips:
        raise OracleCapError("trips", len(partial.trips), config.max_trips)
    widest = max(facility.config.cooks_per_type)
    if widest > config.max_cooks_per_type:
        raise OracleCapError("cooks per food type", widest, config.max_cooks_per_type)
    if facility.n_vehicles > config.max_vehicles:
        raise OracleCapError("vehicles", facility.n_vehicles, config.max_vehicles)


def _started(state: State) -> dict[int, float]:
    return {
        i: start
        for i, start in state.plan.start_times.items()
        if i in state.orders and start < state.t_now - EPS
    }


def _solve_assignment(
    state: State,
    partial: PartialDecision,
    facility: Facility,
    cook_of: Mapping[int, int],
    vehicle_of: Sequence[int],
) -> tuple[dict[int, float], list[float]] | None:
    config = facility.config
    orders = state.orders
    started = _started(state)
    timing = DifferenceConstraints()
    s = {i: timing.var() for i in orders}
    d = [timing.var() for _ in partial.trips]

    for i in orders:
        if i in started:
            timing.pin(s[i], started[i])
        else:
            timing.at_least(s[i], state.t_now)
    for sequence in partial.food_sequences:
        for a, b in itertools.pairwise(sequence):
            timing.after(s[a], s[b])
        previous: dict[int, int] = {}
        for i in sequence:
            cook = cook_of[i]
            if cook in previous:
                before = previous[cook]
                timing.after(s[before], s[i], orders[before].t_prep)
            previous[cook] = i

    last_trip: dict[int, int] = {}
    for q, trip in enumerate(partial.trips):
        stops = [orders[i] for i in trip]
        trip_timing = facility.timing(stops)
        timing.at_least(d[q], state.t_now)
        timing.at_most(d[q], config.operation_horizon)
        if q > 0:
            timing.after(d[q - 1], d[q])
        vehicle = vehicle_of[q]
        if vehicle in last_trip:
            earlier = last_trip[vehicle]
            back = facility.timing([orders[i] for i in partial.trips[earlier]]).duration
            timing.after(d[earlier], d[q], back)
        else:
            timing.at_least(d[q], max(state.t_now, state.plan.return_times[vehicle]))
        last_trip[vehicle] = q
        for order, offset in zip(stops, trip_timing.arrivals, strict=True):
            timing.after(s[order.id], d[q], order.t_prep)
            timing.after(
                d[q], s[order.id], offset - order.t_prep - facility.freshness(order)
            )

    solution = timing.solve()
    if solution is None:
        return None
    return {i: solution[x] for i, x in s.items()}, [solution[x] for x in d]


def _delay(
    state: State,
    trips: Sequence[tuple[int, ...]],
    departures: Sequence[float],
    facility: Facility,
) -> float:
    total = 0.0
    for trip, departure in zip(trips, departures, strict=True):
        stops = [state.orders[i] for i in trip]
        for order, offset in zip(stops, facility.timing(stops).arrivals, strict=True):
            total += facility.lateness(order, departure + offset)
    return total


def _cook_choices(state: State, facility: Facility) -> Iterator[dict[int, int]]:
    pinned = state.plan.cook_of()
    started = _started(state)
    free = sorted(i for i in state.orders if i not in started)
    options = [facility.cooks_by_type[state.orders[i].food_type] for i in free]
    for choice in itertools.product(*options):
        cook_of = {i: pinned[i] for i in started}
        cook_of.update(zip(free, choice, strict=True))
        yield cook_of


type _Best = tuple[float, dict[int, float], list[float], dict[int, int], tuple[int, ...]]


def _solve_partial(
    state: State, partial: PartialDecision, facility: Facility
) -> OracleResult:
    best: _Best | None = None
    tried = 0
    feasible = 0
    vehicles = range(facility.n_vehicles)
    for cook_of in _cook_choices(state, facility):
        for vehicle_of in itertools.product(vehicles, repeat=len(partial.trips)):
            tried += 1
            solved = _solve_assignment(state, partial, facility, cook_of, vehicle_of)
            if solved is None:
                continue
            feasible += 1
            starts, departures = solved
            delay = _delay(state, partial.trips, departures, facility)
            if best is None or delay < best[0] - EPS:
                best = (delay, starts, departures, cook_of, vehicle_of)
    if best is None:
        return OracleResult(False, assignments=tried)

    delay, starts, departures, cook_of, vehicle_of = best
    by_cook: list[list[int]] = [[] for _ in range(facility.n_cooks)]
    for i in sorted(starts, key=lambda i: (starts[i], i)):
        by_cook[cook_of[i]].append(i)
    by_vehicle: list[list[Trip]] = [[] for _ in range(facility.n_vehicles)]
    for trip, departure, vehicle in zip(partial.trips, departures, vehicle_of, strict=True):
        by_vehicle[vehicle].append(Trip(trip, departure))
    plan = Plan(
        tuple(tuple(sequence) for sequence in by_cook),
        starts,
        tuple(tuple(trips) for trips in by_vehicle),
        state.plan.return_times,
    )
    return OracleResult(True, delay, plan, starts, tuple(departures), tried, feasible)


def oracle_atp(
    state: State,
    partial: PartialDecision,
    facility: Facility,
    config: OracleConfig | None = None,
) -> OracleResult:
    """Minimum total delay over every timing of ``partial``.

    Raises OracleCapError when the instance is larger than ``config`` allows.
    """
    config = config or OracleConfig()
    partial.check(state, facility)
    _check_caps(state, partial, facility, config)
    return _solve_partial(state, partial, facility)


# =============================================================================
# Decision space
# =============================================================================


def compositions(n: int, largest: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways of writing ``n`` as parts between 1 and ``largest``."""
    if n == 0:
        yield ()
        return
    for first in range(1, min(n, largest) + 1):
        for rest in compositions(n - first, largest):
            yield (first, *rest)


def _food_sequences(state: State, facility: Facility) -> Iterator[tuple[tuple[int, ...], ...]]:
    started = _started(state)
    per_type: list[list[tuple[int, ...]]] = []
    for food_type in range(facility.config.n_food_types):
        members = [i for i in sorted(state.orders) if state.orders[i].food_type == food_type]
        lead = tuple(sorted((i for i in members if i in started), key=lambda i: (started[i], i)))
        rest = [i for i in members if i not in started]
        per_type.append([lead + tail for tail in itertools.permutations(rest)])
    yield from itertools.product(*per_type)


def _trip_sequences(state: State, capacity: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    ids = sorted(state.orders)
    parts = list(compositions(len(ids), capacity))
    for permutation in itertools.permutations(ids):
        for sizes in parts:
            trips: list[tuple[int, ...]] = []
            cursor = 0
            for size in sizes:
                trips.append(permutation[cursor : cursor + size])
                cursor += size
            yield tuple(trips)


def partial_decisions(state: State, facility: Facility) -> Iterator[PartialDecision]:
    """Every partial decision of ``state``; started orders keep their lead."""
    trip_sequences = list(_trip_sequences(state, facility.config.capacity))
    for food in _food_sequences(state, facility):
        for trips in trip_sequences:
            yield PartialDecision(food, trips)


@dc.dataclass(frozen=True)
class DecisionSpaceResult:
    best: PartialDecision | None
    result: OracleResult
    cost: float
    """Planned delay of the best decision minus the delay already planned."""
    count: int
    feasible: int


def oracle_decision_space(
    state: State,
    facility: Facility,
    config: OracleConfig | None = None,
    *,
    restrict: Callable[[PartialDecision], bool] | None = None,
) -> DecisionSpaceResult:
    """Best partial decision by immediate cost, over the whole space.

    ``restrict`` limits the enumeration to matching partial decisions.
    """
    config = config or OracleConfig()
    if len(state.orders) > config.max_space_orders:
        raise OracleCapError("open orders", len(state.orders), config.max_space_orders)
    baseline = _planned_delay(state, facility)
    best: PartialDecision | None = None
    best_result = OracleResult(False)
    count = feasible = 0
    for partial in partial_decisions(state, facility):
        if restrict is not None and not restrict(partial):
            continue
        count += 1
        result = _solve_partial(state, partial, facility)
        if not result.feasible:
            continue
        feasible += 1
        if best is None or result.delay < best_result.delay - EPS:
            best, best_result = partial, result
    logger.debug("decision space: %d partial decisions, %d feasible", count, feasible)
    return DecisionSpaceResult(best, best_result, best_result.delay - baseline, count, feasible)


def _planned_delay(state: State, facility: Facility) -> float:
    total = 0.0
    for _, trip in state.plan.trips():
        total += _delay(state, [trip.orders], [trip.departure], facility)
    return total


# =============================================================================
# Original decisions
# =============================================================================


@dc.dataclass(frozen=True)
class OriginalSample:
    sampled: int
    feasible: int
    best: float
    """Lowest delay among feasible samples; inf when none was feasible."""


def _sample_original(
    state: State, facility: Facility, rng: np.random.Generator
) -> float | None:
    """Delay of one random cook- and vehicle-indexed decision, None if infeasible.

    Cooks keep their own order sequence and vehicles their own trip list;
    nothing ties the sequences of different cooks or vehicles together.
    """
    orders = state.orders
    started = _started(state)
    pinned = state.plan.cook_of()
    per_cook: list[list[int]] = [[] for _ in range(facility.n_cooks)]
    for i in sorted(started, key=lambda i: (started[i], i)):
        per_cook[pinned[i]].append(i)
    free = [i for i in sorted(orders) if i not in started]
    tail: list[list[int]] = [[] for _ in range(facility.n_cooks)]
    for i in free:
        cooks = facility.cooks_by_type[orders[i].food_type]
        tail[int(rng.choice(cooks))].append(i)
    for cook in range(facility.n_cooks):
        per_cook[cook].extend(int(i) for i in rng.permutation(tail[cook]))

    shuffled = [int(i) for i in rng.permutation(sorted(orders))]
    trips: list[tuple[int, ...]] = []
    while shuffled:
        size = int(rng.integers(1, min(facility.config.capacity, len(shuffled)) + 1))
        trips.append(tuple(shuffled[:size]))
        shuffled = shuffled[size:]
    per_vehicle: list[list[tuple[int, ...]]] = [[] for _ in range(facility.n_vehicles)]
    for trip in trips:
        per_vehicle[int(rng.integers(facility.n_vehicles))].append(trip)

    timing = DifferenceConstraints()
    s = {i: timing.var() for i in orders}
    for i in orders:
        if i in started:
            timing.pin(s[i], started[i])
        else:
            timing.at_least(s[i], state.t_now)
    for sequence in per_cook:
        for a, b in itertools.pairwise(sequence):
            timing.after(s[a], s[b], orders[a].t_prep)

    flat: list[tuple[int, ...]] = []
    variables: list[int] = []
    for vehicle, own in enumerate(per_vehicle):
        previous: tuple[int, int] | None = None
        for trip in own:
            stops = [orders[i] for i in trip]
            trip_timing = facility.timing(stops)
            x = timing.var()
            timing.at_least(x, max(state.t_now, state.plan.return_times[vehicle]))
            timing.at_most(x, facility.config.operation_horizon)
            if previous is not None:
                timing.after(previous[0], x, previous[1])
            for order, offset in zip(stops, trip_timing.arrivals, strict=True):
                timing.after(s[order.id], x, order.t_prep)
                timing.after(x, s[order.id], offset - order.t_prep - facility.freshness(order))
            previous = (x, trip_timing.duration)
            flat.append(trip)
            variables.append(x)

    solution = timing.solve()
    if solution is None:
        return None
    return _delay(state, flat, [solution[x] for x in variables], facility)


def sample_original_decisions(
    state: State, facility: Facility, rng: np.random.Generator, samples: int
) -> OriginalSample:
    """Draw random original decisions and keep the lowest delay among the feasible."""
    best = math.inf
    feasible = 0
    for _ in range(samples):
        delay = _sample_original(state, facility, rng)
        if delay is None:
            continue
        feasible += 1
        best = min(best, delay)
    return OriginalSample(samples, feasible, best)


# =============================================================================
# Small instances
# =============================================================================


@dc.dataclass(frozen=True)
class AtpInstance:
    """A state with pinned history and one partial decision for it.

    The state's plan holds only the orders already in preparation.
    """

    state: State
    facility: Facility
    partial: PartialDecision


_T_NOW = 100.0


def _matrix_facility(
    problem: ProblemConfig, minutes: npt.NDArray[np.float64]
) -> Facility:
    ids = range(minutes.shape[0])
    return Facility(problem, TravelTimeProvider.from_matrix(ids, minutes))


def _symmetric(
    rng: np.random.Generator, size: int, low: int, high: int
) -> npt.NDArray[np.float64]:
    minutes = rng.integers(low, high + 1, size=(size, size)).astype(np.float64)
    return np.minimum(minutes, minutes.T)


def _schedule_started(
    orders: dict[int, Order],
    started: dict[int, int],
    rng: np.random.Generator,
) -> dict[int, float]:
    """Back-to-back past starts per cook, the last one shortly before now."""
    starts: dict[int, float] = {}
    for cook in sorted(set(started.values())):
        queue = [i for i in sorted(started) if started[i] == cook]
        cursor = _T_NOW - float(rng.integers(1, 9))
        starts[queue[-1]] = cursor
        for i in reversed(queue[:-1]):
            # each earlier order finishes before the next one starts
            cursor -= orders[i].t_prep + float(rng.integers(0, 4))
            starts[i] = cursor
    return starts


def _state(
    orders: dict[int, Order],
    cook_of: Mapping[int, int],
    starts: Mapping[int, float],
    facility: Facility,
    returns: Sequence[float],
) -> State:
    sequences: list[list[int]] = [[] for _ in range(facility.n_cooks)]
    for i in sorted(starts, key=lambda i: (starts[i], i)):
        sequences[cook_of[i]].append(i)
    plan = Plan(
        tuple(tuple(sequence) for sequence in sequences),
        dict(starts),
        ((),) * facility.n_vehicles,
        tuple(returns),
    )
    return State(_T_NOW, orders, None, plan)


def random_atp_instance(
    rng: np.random.Generator,
    config: OracleConfig | None = None,
    *,
    max_orders: int | None = None,
) -> AtpInstance:
    """Random integer-valued instance inside the oracle's caps."""
    config = config or OracleConfig()
    n_types = int(rng.integers(1, 4))
    capacity = int(rng.integers(1, 4))
    limit = min(
        config.max_orders, config.max_trips * capacity, max_orders or config.max_orders
    )
    n = int(rng.integers(1, limit + 1))
    problem = ProblemConfig(
        freshness=tuple(float(rng.integers(8, 26)) for _ in range(n_types)),
        cooks_per_type=tuple(
            int(rng.integers(1, config.max_cooks_per_type + 1)) for _ in range(n_types)
        ),
        fleet_size=int(rng.integers(1, config.max_vehicles + 1)),
        capacity=capacity,
        promise=30.0,
        capture_horizon=_T_NOW,
        operation_horizon=_T_NOW + float(rng.integers(15, 61)),
    )
    facility = _matrix_facility(problem, _symmetric(rng, n + 1, 1, 8))

    orders: dict[int, Order] = {}
    started: dict[int, int] = {}
    for k in range(1, n + 1):
        food_type = int(rng.integers(n_types))
        orders[k] = Order(
            id=k,
            food_type=food_type,
            t_order=_T_NOW - float(rng.integers(0, 41)),
            t_prep=float(rng.integers(2, 13)),
            location=Location(k, 0.0, 0.0),
            service_time=float(rng.integers(0, 3)),
        )
        if rng.random() < 0.3:
            started[k] = int(rng.choice(facility.cooks_by_type[food_type]))
    starts = _schedule_started(orders, started, rng)
    for i, start in starts.items():
        orders[i] = dc.replace(orders[i], t_order=min(orders[i].t_order, start))
    returns = [_T_NOW + float(rng.integers(0, 11)) for _ in range(problem.fleet_size)]
    state = _state(orders, started, starts, facility, returns)

    food: list[tuple[int, ...]] = []
    for food_type in range(n_types):
        members = [i for i in orders if orders[i].food_type == food_type]
        lead = sorted((i for i in members if i in starts), key=lambda i: (starts[i], i))
        rest = [int(i) for i in rng.permutation([i for i in members if i not in starts])]
        food.append(tuple(lead + rest))
    shapes = [c for c in compositions(n, capacity) if len(c) <= config.max_trips]
    sizes = shapes[int(rng.integers(len(shapes)))]
    flat = [int(i) for i in rng.permutation(sorted(orders))]
    trips: list[tuple[int, ...]] = []
    for size in sizes:
        trips.append(tuple(flat[:size]))
        flat = flat[size:]
    return AtpInstance(state, facility, PartialDecision(tuple(food), tuple(trips)))


def sorted_preparation_instance(rng: np.random.Generator) -> tuple[State, Facility]:
    """One food type and one cook; deadlines and preparation times sorted together.

    Every order rides alone and there is a vehicle per order, so departures
    of other orders never interfere.
    """
    n = int(rng.integers(2, 4))
    travel = float(rng.integers(3, 8))
    problem = ProblemConfig(
        freshness=(120.0,),
        cooks_per_type=(1,),
        fleet_size=n,
        capacity=1,
        promise=30.0,
        capture_horizon=_T_NOW,
        operation_horizon=_T_NOW + 300.0,
    )
    minutes = np.full((n + 1, n + 1), travel, dtype=np.float64)
    facility = _matrix_facility(problem, minutes)
    placed = np.sort(rng.integers(0, 21, size=n))
    preparation = np.sort(rng.integers(2, 12, size=n))
    orders = {
        k: Order(
            id=k,
            food_type=0,
            t_order=_T_NOW - 30.0 + float(placed[k - 1]),
            t_prep=float(preparation[k - 1]),
            location=Location(k, 0.0, 0.0),
        )
        for k in range(1, n + 1)
    }
    return _state(orders, {}, {}, facility, [_T_NOW] * n), facility


def spt_departure_instance(rng: np.random.Generator) -> tuple[State, Facility]:
    """Ready, late orders at the end of the day, one vehicle, single-order trips."""
    n = int(rng.integers(2, 5))
    problem = ProblemConfig(
        freshness=(500.0,),
        cooks_per_type=(n,),
        fleet_size=1,
        capacity=1,
        promise=30.0,
        capture_horizon=_T_NOW,
        operation_horizon=_T_NOW + 500.0,
    )
    minutes = _symmetric(rng, n + 1, 1, 12)
    minutes[0, 1:] = minutes[1:, 0] = rng.choice(np.arange(1, 15), size=n, replace=False)
    facility = _matrix_facility(problem, minutes)
    orders: dict[int, Order] = {}
    starts: dict[int, float] = {}
    for k in range(1, n + 1):
        t_prep = float(rng.integers(2, 12))
        starts[k] = _T_NOW - t_prep - float(rng.integers(0, 6))
        orders[k] = Order(k, 0, _T_NOW - 45.0, t_prep, Location(k, 0.0, 0.0))
    cook_of = {k: k - 1 for k in orders}
    return _state(orders, cook_of, starts, facility, [_T_NOW]), facility


# =============================================================================
# Witnesses
# =============================================================================


@dc.dataclass(frozen=True)
class Witness:
    claimed: float
    """Best value over the decisions claimed to contain an optimum."""
    challenger: float
    """Best value over the competing decisions."""
    tolerance: float = 1e-6

    @property
    def holds(self) -> bool:
        return self.claimed <= self.challenger + self.tolerance


def sorted_preparation_witness(
    state: State, facility: Facility, config: OracleConfig | None = None
) -> Witness:
    """Preparing orders by deadline (then preparation time) loses nothing."""
    promise = facility.config.promise

    def deadline(i: int) -> tuple[float, float, int]:
        order = state.orders[i]
        reach = facility.timing([order]).arrivals[0]
        return (order.t_order + promise - reach, order.t_prep, i)

    def is_sorted(partial: PartialDecision) -> bool:
        return all(
            list(sequence) == sorted(sequence, key=deadline)
            for sequence in partial.food_sequences
        )

    everything = oracle_decision_space(state, facility, config)
    restricted = oracle_decision_space(state, facility, config, restrict=is_sorted)
    return Witness(restricted.result.delay, everything.result.delay)


def spt_departure_witness(
    state: State, facility: Facility, config: OracleConfig | None = None
) -> Witness:
    """Dispatching single-order trips shortest round trip first loses nothing."""

    def duration(trip: tuple[int, ...]) -> tuple[float, tuple[int, ...]]:
        return (facility.timing([state.orders[i] for i in trip]).duration, trip)

    def is_spt(partial: PartialDecision) -> bool:
        return list(partial.trips) == sorted(partial.trips, key=duration)

    everything = oracle_decision_space(state, facility, config)
    restricted = oracle_decision_space(state, facility, config, restrict=is_spt)
    return Witness(restricted.result.delay, everything.result.delay)


def condensed_witness(
    state: State,
    facility: Facility,
    rng: np.random.Generator,
    samples: int,
    config: OracleConfig | None = None,
) -> Witness:
    """No sampled cook- and vehicle-indexed decision beats the condensed optimum."""
    condensed = oracle_decision_space(state, facility, config)
    original = sample_original_decisions(state, facility, rng, samples)
    return Witness(condensed.result.delay, original.best)

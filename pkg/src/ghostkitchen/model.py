"""Orders, plans, states and decisions of the sequential decision process.

Also holds the delay accounting (planned and realized) and the transition
from one decision point to the next.
"""

from __future__ import annotations

import dataclasses as dc
import functools
import typing as ty
from collections.abc import Iterator, Mapping, Sequence
from enum import Enum, auto

from ghostkitchen._defaults import EPS
from ghostkitchen.config import ProblemConfig
from ghostkitchen.errors import PlanIntegrityError, PlanViolationError
from ghostkitchen.travel import KITCHEN, Location, TravelTimeProvider


class _Unset(Enum):
    """Sentinel for unset fields in _replace."""

    UNSET = auto()


@dc.dataclass(frozen=True, slots=True)
class Order:
    id: int
    food_type: int
    t_order: float
    t_prep: float
    location: Location
    service_time: float = 0.0

    def __post_init__(self) -> None:
        if self.t_prep <= 0:
            raise ValueError(f"order {self.id}: preparation time must be positive")
        if self.service_time < 0:
            raise ValueError(f"order {self.id}: service time must be non-negative")


@dc.dataclass(frozen=True, slots=True)
class TripTiming:
    """Offsets of a trip relative to its departure."""

    arrivals: tuple[float, ...]
    """Minutes from departure until each stop is served."""
    duration: float
    """Minutes from departure until the vehicle is back at the kitchen."""
    driving: float


@functools.lru_cache(maxsize=1 << 16)
def _trip_timing(
    stops: tuple[Order, ...], travel: TravelTimeProvider, service_in_arrival: bool
) -> TripTiming:
    clock = 0.0
    driving = 0.0
    arrivals: list[float] = []
    here = KITCHEN
    for order in stops:
        leg = travel.travel_time(here, order.location)
        driving += leg
        clock += leg + order.service_time
        arrivals.append(clock if service_in_arrival else clock - order.service_time)
        here = order.location
    back = travel.travel_time(here, KITCHEN)
    return TripTiming(tuple(arrivals), clock + back, driving + back)


@dc.dataclass(frozen=True, eq=False)
class Facility:
    """A ghost kitchen: its resources, service levels and road network."""

    config: ProblemConfig
    travel: TravelTimeProvider
    cook_types: tuple[int, ...] = dc.field(init=False)
    """Food type of each cook, cooks numbered food type by food type."""
    cooks_by_type: tuple[tuple[int, ...], ...] = dc.field(init=False)

    def __post_init__(self) -> None:
        types = tuple(
            food_type
            for food_type, count in enumerate(self.config.cooks_per_type)
            for _ in range(count)
        )
        by_type = tuple(
            tuple(cook for cook, kind in enumerate(types) if kind == food_type)
            for food_type in range(self.config.n_food_types)
        )
        object.__setattr__(self, "cook_types", types)
        object.__setattr__(self, "cooks_by_type", by_type)

    @property
    def n_cooks(self) -> int:
        return len(self.cook_types)

    @property
    def n_vehicles(self) -> int:
        return self.config.fleet_size

    def timing(self, stops: Sequence[Order]) -> TripTiming:
        return _trip_timing(tuple(stops), self.travel, self.config.service_in_arrival)

    def freshness(self, order: Order) -> float:
        return self.config.freshness[order.food_type]

    def lateness(self, order: Order, arrival: float) -> float:
        """Delay of an order arriving at ``arrival``."""
        return max(0.0, arrival - order.t_order - self.config.promise)

    def direct_travel(self, order: Order) -> float:
        return self.travel.from_kitchen(order.location)


# =============================================================================
# Plans, states, decisions
# =============================================================================


@dc.dataclass(frozen=True)
class Trip:
    orders: tuple[int, ...]
    departure: float


@dc.dataclass(frozen=True)
class Plan:
    """Planned cook schedules and vehicle schedules."""

    cook_sequences: tuple[tuple[int, ...], ...]
    start_times: Mapping[int, float]
    vehicle_trips: tuple[tuple[Trip, ...], ...]
    return_times: tuple[float, ...]
    """When each vehicle is back from trips that already left."""

    @classmethod
    def idle(cls, n_cooks: int, n_vehicles: int, t_now: float) -> Plan:
        return cls(((),) * n_cooks, {}, ((),) * n_vehicles, (t_now,) * n_vehicles)

    def _replace(
        self,
        *,
        cook_sequences: tuple[tuple[int, ...], ...] | _Unset = _Unset.UNSET,
        start_times: Mapping[int, float] | _Unset = _Unset.UNSET,
        vehicle_trips: tuple[tuple[Trip, ...], ...] | _Unset = _Unset.UNSET,
        return_times: tuple[float, ...] | _Unset = _Unset.UNSET,
    ) -> Plan:
        """Return a copy with specified fields replaced."""
        return Plan(
            cook_sequences=(
                self.cook_sequences
                if cook_sequences is _Unset.UNSET
                else cook_sequences
            ),
            start_times=self.start_times if start_times is _Unset.UNSET else start_times,
            vehicle_trips=(
                self.vehicle_trips if vehicle_trips is _Unset.UNSET else vehicle_trips
            ),
            return_times=(
                self.return_times if return_times is _Unset.UNSET else return_times
            ),
        )

    def with_order(
        self,
        order_id: int,
        cook: int,
        start: float,
        vehicle_trips: tuple[tuple[Trip, ...], ...],
    ) -> Plan:
        """Append ``order_id`` to ``cook``'s sequence, with the given trips."""
        sequences = list(self.cook_sequences)
        sequences[cook] = (*sequences[cook], order_id)
        return self._replace(
            cook_sequences=tuple(sequences),
            start_times={**self.start_times, order_id: start},
            vehicle_trips=vehicle_trips,
        )

    def trips(self) -> Iterator[tuple[int, Trip]]:
        """Yield (vehicle, trip) for every planned trip."""
        for vehicle, trips in enumerate(self.vehicle_trips):
            for trip in trips:
                yield vehicle, trip

    def cook_of(self) -> dict[int, int]:
        return {
            order_id: cook
            for cook, sequence in enumerate(self.cook_sequences)
            for order_id in sequence
        }

    def order_ids(self) -> frozenset[int]:
        return frozenset(self.start_times)

    def cook_free_time(self, cook: int, orders: Mapping[int, Order], t_now: float) -> float:
        """When the cook finishes its last planned order, at least ``t_now``."""
        sequence = self.cook_sequences[cook]
        if not sequence:
            return t_now
        last = sequence[-1]
        return max(t_now, self.start_times[last] + _lookup(orders, last).t_prep)

    def vehicle_free_time(
        self, vehicle: int, orders: Mapping[int, Order], facility: Facility
    ) -> float:
        """When the vehicle returns from its last planned trip."""
        trips = self.vehicle_trips[vehicle]
        if not trips:
            return self.return_times[vehicle]
        last = trips[-1]
        timing = facility.timing([_lookup(orders, i) for i in last.orders])
        return last.departure + timing.duration


@dc.dataclass(frozen=True)
class State:
    """A decision point: open orders and the plan made so far."""

    t_now: float
    orders: Mapping[int, Order]
    """Open orders, including the new one."""
    new_order: Order | None
    plan: Plan
    """Covers every open order except the new one."""

    @classmethod
    def initial(cls, first: Order, facility: Facility) -> State:
        plan = Plan.idle(facility.n_cooks, facility.n_vehicles, first.t_order)
        return cls(first.t_order, {first.id: first}, first, plan)

    def is_started(self, order_id: int) -> bool:
        """Preparation began before now; such orders are pinned."""
        start = self.plan.start_times.get(order_id)
        return start is not None and start < self.t_now - EPS

    def started(self) -> frozenset[int]:
        return frozenset(i for i in self.plan.start_times if self.is_started(i))


@dc.dataclass(frozen=True)
class Decision:
    """The updated plan, covering every open order including the new one."""

    plan: Plan


# =============================================================================
# Delay accounting
# =============================================================================


def _lookup(orders: Mapping[int, Order], order_id: int) -> Order:
    try:
        return orders[order_id]
    except KeyError:
        raise PlanIntegrityError(order_id) from None


def trip_arrivals(
    trip: Trip, orders: Mapping[int, Order], facility: Facility
) -> list[tuple[Order, float]]:
    stops = [_lookup(orders, i) for i in trip.orders]
    timing = facility.timing(stops)
    return [
        (order, trip.departure + offset)
        for order, offset in zip(stops, timing.arrivals, strict=True)
    ]


def plan_delay(plan: Plan, orders: Mapping[int, Order], facility: Facility) -> float:
    """Total planned delay over every trip and stop."""
    total = 0.0
    for _, trip in plan.trips():
        for order, arrival in trip_arrivals(trip, orders, facility):
            total += facility.lateness(order, arrival)
    return total


def marginal_cost(
    old: Plan, new: Plan, orders: Mapping[int, Order], facility: Facility
) -> float:
    """Change in planned delay caused by replacing ``old`` with ``new``."""
    return plan_delay(new, orders, facility) - plan_delay(old, orders, facility)


@dc.dataclass(frozen=True, slots=True)
class Delivery:
    """Realized outcome of one order."""

    order: int
    food_type: int
    cook: int
    vehicle: int
    t_order: float
    start: float
    ready: float
    departure: float
    arrival: float
    delay: float
    freshness: float
    """Ready-to-door minutes."""
    direct_travel: float


@dc.dataclass(frozen=True, slots=True)
class DispatchedTrip:
    vehicle: int
    orders: tuple[int, ...]
    departure: float
    return_time: float
    driving: float


class Departure(ty.NamedTuple):
    """Trips leaving before a cutoff, and the plan that remains."""

    remaining: Plan
    deliveries: tuple[Delivery, ...]
    trips: tuple[DispatchedTrip, ...]


def depart(
    plan: Plan,
    orders: Mapping[int, Order],
    until: float | None,
    facility: Facility,
) -> Departure:
    """Execute every trip departing before ``until`` (all trips when None)."""
    cook_of = plan.cook_of()
    deliveries: list[Delivery] = []
    dispatched: list[DispatchedTrip] = []
    kept_trips: list[tuple[Trip, ...]] = []
    returns: list[float] = []
    gone: set[int] = set()
    for vehicle, trips in enumerate(plan.vehicle_trips):
        back = plan.return_times[vehicle]
        kept: list[Trip] = []
        for trip in trips:
            if until is not None and trip.departure >= until - EPS:
                kept.append(trip)
                continue
            stops = [_lookup(orders, i) for i in trip.orders]
            timing = facility.timing(stops)
            back = max(back, trip.departure + timing.duration)
            dispatched.append(
                DispatchedTrip(
                    vehicle,
                    trip.orders,
                    trip.departure,
                    trip.departure + timing.duration,
                    timing.driving,
                )
            )
            for order, offset in zip(stops, timing.arrivals, strict=True):
                start = plan.start_times[order.id]
                ready = start + order.t_prep
                arrival = trip.departure + offset
                deliveries.append(
                    Delivery(
                        order=order.id,
                        food_type=order.food_type,
                        cook=cook_of[order.id],
                        vehicle=vehicle,
                        t_order=order.t_order,
                        start=start,
                        ready=ready,
                        departure=trip.departure,
                        arrival=arrival,
                        delay=facility.lateness(order, arrival),
                        freshness=arrival - ready,
                        direct_travel=facility.direct_travel(order),
                    )
                )
                gone.add(order.id)
        kept_trips.append(tuple(kept))
        returns.append(back if until is None else max(until, back))

    remaining = Plan(
        cook_sequences=tuple(
            tuple(i for i in sequence if i not in gone)
            for sequence in plan.cook_sequences
        ),
        start_times={i: t for i, t in plan.start_times.items() if i not in gone},
        vehicle_trips=tuple(kept_trips),
        return_times=tuple(returns),
    )
    return Departure(remaining, tuple(deliveries), tuple(dispatched))


def advance(
    state: State, decision: Decision, next_order: Order | None, facility: Facility
) -> tuple[State, Departure]:
    """Move to the next decision point, returning what departed in between."""
    t_next = facility.config.capture_horizon if next_order is None else next_order.t_order
    if t_next < state.t_now - EPS:
        raise ValueError(f"next decision point {t_next} precedes {state.t_now}")
    departure = depart(decision.plan, state.orders, t_next, facility)
    remaining = departure.remaining
    orders = {i: state.orders[i] for i in remaining.start_times}
    if next_order is not None:
        if next_order.id in state.orders:
            raise ValueError(f"order {next_order.id} placed twice")
        orders[next_order.id] = next_order
    return State(t_next, orders, next_order, remaining), departure


def transition(
    state: State, decision: Decision, next_order: Order | None, facility: Facility
) -> State:
    return advance(state, decision, next_order, facility)[0]


# =============================================================================
# Plan validity
# =============================================================================


def validate_plan(state: State, plan: Plan, facility: Facility) -> list[str]:
    """Return every violated feasibility condition of ``plan`` in ``state``."""
    config = facility.config
    t_now = state.t_now
    problems: list[str] = []
    open_ids = set(state.orders)

    if len(plan.cook_sequences) != facility.n_cooks:
        problems.append("cook count mismatch")
    if len(plan.vehicle_trips) != facility.n_vehicles:
        problems.append("vehicle count mismatch")
    if problems:
        return problems

    cooked = [i for sequence in plan.cook_sequences for i in sequence]
    if sorted(cooked) != sorted(open_ids):
        problems.append("cook sequences do not cover open orders exactly once")
    if set(plan.start_times) != open_ids:
        problems.append("start times do not match open orders")
    carried = [i for _, trip in plan.trips() for i in trip.orders]
    if sorted(carried) != sorted(open_ids):
        problems.append("trips do not cover open orders exactly once")
    if problems:
        return problems

    before = state.plan.cook_of()
    for cook, sequence in enumerate(plan.cook_sequences):
        previous_end: float | None = None
        for i in sequence:
            order = state.orders[i]
            start = plan.start_times[i]
            if order.food_type != facility.cook_types[cook]:
                problems.append(f"order {i} assigned to cook {cook} of another type")
            if state.is_started(i):
                if abs(start - state.plan.start_times[i]) > EPS or before[i] != cook:
                    problems.append(f"started order {i} was moved")
            elif start < t_now - EPS:
                problems.append(f"order {i} starts before now")
            if previous_end is not None and start < previous_end - EPS:
                problems.append(f"cook {cook} overlaps at order {i}")
            previous_end = start + order.t_prep

    for vehicle, trips in enumerate(plan.vehicle_trips):
        available = plan.return_times[vehicle]
        for trip in trips:
            if not 1 <= len(trip.orders) <= config.capacity:
                problems.append(f"trip {trip.orders} violates capacity")
            if trip.departure < t_now - EPS:
                problems.append(f"trip {trip.orders} departs before now")
            if trip.departure > config.operation_horizon + EPS:
                problems.append(f"trip {trip.orders} departs after the horizon")
            if trip.departure < available - EPS:
                problems.append(f"vehicle {vehicle} busy at {trip.departure}")
            for order, arrival in trip_arrivals(trip, state.orders, facility):
                ready = plan.start_times[order.id] + order.t_prep
                if trip.departure < ready - EPS:
                    problems.append(f"order {order.id} leaves before it is ready")
                if arrival - ready > facility.freshness(order) + EPS:
                    problems.append(f"order {order.id} arrives stale")
            stops = [state.orders[i] for i in trip.orders]
            available = trip.departure + facility.timing(stops).duration
    return problems


def check_decision(state: State, decision: Decision, facility: Facility) -> None:
    """Raise PlanViolationError unless the decision is feasible in ``state``."""
    problems = validate_plan(state, decision.plan, facility)
    if problems:
        raise PlanViolationError(problems)
    if decision.plan.return_times != state.plan.return_times:
        raise PlanViolationError(["vehicle return times were rewritten"])

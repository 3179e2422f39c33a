"""First-in-first-out insertion of the newest order into the current plan."""

from __future__ import annotations

import itertools
import logging
import typing as ty
from collections.abc import Sequence

from ghostkitchen._defaults import EPS
from ghostkitchen.errors import PlanViolationError
from ghostkitchen.model import Decision, Facility, Order, Plan, State, Trip

logger = logging.getLogger(__name__)


class _Insertion(ty.NamedTuple):
    added_delay: float
    vehicle: int
    trip: Trip
    start: float


def _first_free(times: Sequence[float]) -> int:
    return min(range(len(times)), key=lambda k: (times[k], k))


def _join_last_trip(
    plan: Plan,
    state: State,
    facility: Facility,
    order: Order,
    earliest: float,
    vehicle: int,
) -> _Insertion | None:
    """Cheapest way to add ``order`` to the vehicle's last planned trip."""
    trips = plan.vehicle_trips[vehicle]
    if not trips:
        return None
    last = trips[-1]
    p = order.t_prep
    if len(last.orders) >= facility.config.capacity or last.departure < earliest + p - EPS:
        return None
    orders = {**state.orders, order.id: order}
    before = sum(
        facility.lateness(orders[i], last.departure + offset)
        for i, offset in zip(
            last.orders, facility.timing([orders[i] for i in last.orders]).arrivals, strict=True
        )
    )
    best: _Insertion | None = None
    for sequence in itertools.permutations((*last.orders, order.id)):
        stops = [orders[i] for i in sequence]
        arrivals = facility.timing(stops).arrivals
        start = earliest
        delay = 0.0
        for stop, offset in zip(stops, arrivals, strict=True):
            arrival = last.departure + offset
            delay += facility.lateness(stop, arrival)
            if stop.id == order.id:
                start = max(earliest, arrival - p - facility.freshness(stop))
                continue
            ready = plan.start_times[stop.id] + stop.t_prep
            if arrival - ready > facility.freshness(stop) + EPS:
                break
        else:
            if start + p > last.departure + EPS:
                continue
            option = _Insertion(delay - before, vehicle, Trip(sequence, last.departure), start)
            if best is None or option.added_delay < best.added_delay - EPS:
                best = option
    return best


def fifo_insert(state: State, facility: Facility) -> Decision:
    """Plan the new order without touching any planned time.

    The order goes to the first available cook of its food type. It joins
    the last trip of some vehicle if that is feasible, picking the stop
    order with least added delay; otherwise it gets a new trip on the first
    vehicle to become free. Its start is postponed when freshness needs it.

    Raises PlanViolationError when even a trip of its own cannot deliver
    the order fresh.
    """
    plan = state.plan
    order = state.new_order
    if order is None:
        return Decision(plan)
    orders = state.orders

    cooks = facility.cooks_by_type[order.food_type]
    free = [plan.cook_free_time(c, orders, state.t_now) for c in cooks]
    cook = cooks[_first_free(free)]
    earliest = max(state.t_now, min(free))
    p = order.t_prep

    best: _Insertion | None = None
    for vehicle in range(facility.n_vehicles):
        option = _join_last_trip(plan, state, facility, order, earliest, vehicle)
        if option is not None and (best is None or option.added_delay < best.added_delay - EPS):
            best = option

    vehicle_trips = list(plan.vehicle_trips)
    if best is not None:
        vehicle_trips[best.vehicle] = (*vehicle_trips[best.vehicle][:-1], best.trip)
        vehicle, start = best.vehicle, best.start
    else:
        vehicle_free = [
            plan.vehicle_free_time(v, orders, facility) for v in range(facility.n_vehicles)
        ]
        offset = facility.timing([order]).arrivals[0]
        if offset > facility.freshness(order) + EPS:
            raise PlanViolationError([f"order {order.id} cannot be delivered fresh"])
        vehicle = _first_free(vehicle_free)
        departure = max(earliest + p, vehicle_free[vehicle])
        start = max(earliest, departure + offset - p - facility.freshness(order))
        start = min(start, departure - p)
        vehicle_trips[vehicle] = (*vehicle_trips[vehicle], Trip((order.id,), departure))

    logger.debug("fifo: order %d to cook %d, vehicle %d", order.id, cook, vehicle)
    return Decision(plan.with_order(order.id, cook, start, tuple(vehicle_trips)))

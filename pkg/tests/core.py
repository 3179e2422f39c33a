"""Builders shared by the test suites."""

from collections.abc import Iterable, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from ghostkitchen.config import ProblemConfig
from ghostkitchen.model import Facility, Order, Plan, State, Trip, advance
from ghostkitchen.solver import fifo_insert
from ghostkitchen.travel import Location, TravelTimeProvider

type Batch = tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]
"""Feature rows and their targets."""


def line_facility(
    positions: Sequence[float],
    *,
    freshness: Sequence[float] = (20.0,),
    cooks_per_type: Sequence[int] | None = None,
    fleet_size: int = 1,
    capacity: int = 3,
    promise: float = 30.0,
    capture_horizon: float = 1440.0,
    operation_horizon: float = 1560.0,
    service_in_arrival: bool = True,
) -> Facility:
    """Customers 1..n on a line through the kitchen, ``positions[k - 1]`` minutes out.

    Travel between two customers is the difference of their positions.
    """
    points = np.asarray([0.0, *positions], dtype=np.float64)
    minutes = np.abs(points[:, np.newaxis] - points[np.newaxis, :])
    travel = TravelTimeProvider.from_matrix(range(len(points)), minutes)
    problem = ProblemConfig(
        freshness=tuple(freshness),
        cooks_per_type=tuple(cooks_per_type or (1,) * len(freshness)),
        fleet_size=fleet_size,
        capacity=capacity,
        promise=promise,
        capture_horizon=capture_horizon,
        operation_horizon=operation_horizon,
        service_in_arrival=service_in_arrival,
    )
    return Facility(problem, travel)


def order(
    order_id: int,
    *,
    at: int | None = None,
    food_type: int = 0,
    t_order: float = 0.0,
    t_prep: float = 10.0,
    service: float = 0.0,
) -> Order:
    """Order delivered to customer ``at`` (its own id by default)."""
    location = Location(order_id if at is None else at, 0.0, 0.0)
    return Order(order_id, food_type, t_order, t_prep, location, service)


def make_plan(
    facility: Facility,
    t_now: float,
    *,
    cooks: Sequence[Sequence[int]] = (),
    starts: Mapping[int, float] | None = None,
    trips: Sequence[Sequence[Trip]] = (),
    returns: Sequence[float] | None = None,
) -> Plan:
    """Plan with missing cooks and vehicles left empty."""
    cook_sequences = [tuple(seq) for seq in cooks]
    cook_sequences += [()] * (facility.n_cooks - len(cook_sequences))
    vehicle_trips = [tuple(own) for own in trips]
    vehicle_trips += [()] * (facility.n_vehicles - len(vehicle_trips))
    return Plan(
        tuple(cook_sequences),
        dict(starts or {}),
        tuple(vehicle_trips),
        tuple(returns) if returns is not None else (t_now,) * facility.n_vehicles,
    )


def make_state(
    t_now: float,
    orders: Iterable[Order],
    plan: Plan,
    new_order: Order | None = None,
) -> State:
    by_id = {o.id: o for o in orders}
    if new_order is not None:
        by_id[new_order.id] = new_order
    return State(t_now, by_id, new_order, plan)


def fifo_state(orders: Sequence[Order], facility: Facility, index: int) -> State:
    """Decision point ``index`` of a day planned by FIFO until then."""
    state = State.initial(orders[0], facility)
    for k in range(1, index + 1):
        state, _ = advance(state, fifo_insert(state, facility), orders[k], facility)
    return state


def bundling_state() -> tuple[State, Facility]:
    """Three vehicles, two cooks, and a new order close to a planned one.

    Order 4 (cook 1) waits for vehicle 1, back at 110. Order 3 (cook 0) waits
    for vehicle 2, back at 125, so its start is postponed to 105. Vehicle 0
    is idle. The new order 5 shares cook 0 with order 3 and lives one minute
    from order 4, on the other side of the kitchen from order 3.
    """
    facility = line_facility(
        [1.0, 1.0, -10.0, 6.0, 7.0], freshness=(20.0, 8.0), fleet_size=3, capacity=2
    )
    plan = make_plan(
        facility,
        100.0,
        cooks=[[3], [4]],
        starts={3: 105.0, 4: 102.0},
        trips=[[], [Trip((4,), 110.0)], [Trip((3,), 125.0)]],
        returns=[100.0, 110.0, 125.0],
    )
    orders = [
        order(3, food_type=0, t_order=98.0, t_prep=10.0),
        order(4, food_type=1, t_order=95.0, t_prep=8.0),
    ]
    new = order(5, food_type=0, t_order=100.0, t_prep=14.0)
    return make_state(100.0, orders, plan, new_order=new), facility

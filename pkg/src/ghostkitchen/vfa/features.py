"""Summary features of a post-decision state.

The vector has the same 21 entries whatever the number of cooks and
vehicles, so a network trained on one facility transfers to another.
Times are hours from now, the current time is a fraction of the
operation horizon, counts are raw.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from ghostkitchen._defaults import EPS
from ghostkitchen.model import Facility, Plan, State

N_FEATURES = 21

FEATURE_NAMES: tuple[str, ...] = (
    "current_time",
    "idle_cooks",
    "orders_per_cook_mean",
    "orders_per_cook_max",
    "orders_per_cook_min",
    "work_per_cook_mean",
    "work_per_cook_max",
    "work_per_cook_min",
    "cook_finish_mean",
    "cook_finish_max",
    "cook_finish_min",
    "idle_vehicles",
    "vehicle_return_mean",
    "vehicle_return_max",
    "vehicle_return_min",
    "trips_per_vehicle_mean",
    "trips_per_vehicle_max",
    "trips_per_vehicle_min",
    "orders_per_vehicle_mean",
    "orders_per_vehicle_max",
    "orders_per_vehicle_min",
)


def _summary(values: list[float]) -> list[float]:
    # Sorted so that the sum, and hence the mean, ignores resource order.
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        return [0.0, 0.0, 0.0]
    return [float(ordered.mean()), float(ordered[-1]), float(ordered[0])]


def extract_features(state: State, plan: Plan, facility: Facility) -> npt.NDArray[np.float64]:
    """Feature vector of ``plan`` applied in ``state``."""
    t_now = state.t_now
    orders = state.orders

    counts: list[float] = []
    work: list[float] = []
    finish: list[float] = []
    idle_cooks = 0
    for sequence in plan.cook_sequences:
        pending = [
            orders[i] for i in sequence if plan.start_times[i] + orders[i].t_prep > t_now
        ]
        counts.append(float(len(sequence)))
        work.append(sum(order.t_prep for order in pending) / 60.0)
        end = max((plan.start_times[o.id] + o.t_prep for o in pending), default=t_now)
        finish.append((end - t_now) / 60.0)
        idle_cooks += not pending

    returns: list[float] = []
    trips: list[float] = []
    carried: list[float] = []
    idle_vehicles = 0
    for vehicle, planned in enumerate(plan.vehicle_trips):
        back = max(t_now, plan.vehicle_free_time(vehicle, orders, facility))
        returns.append((back - t_now) / 60.0)
        trips.append(float(len(planned)))
        carried.append(float(sum(len(trip.orders) for trip in planned)))
        idle_vehicles += not planned and plan.return_times[vehicle] <= t_now + EPS

    n_cooks = max(len(plan.cook_sequences), 1)
    n_vehicles = max(len(plan.vehicle_trips), 1)
    vector = [
        t_now / facility.config.operation_horizon,
        idle_cooks / n_cooks,
        *_summary(counts),
        *_summary(work),
        *_summary(finish),
        idle_vehicles / n_vehicles,
        *_summary(returns),
        *_summary(trips),
        *_summary(carried),
    ]
    return np.asarray(vector, dtype=np.float64)

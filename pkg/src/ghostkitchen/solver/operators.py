"""Neighbourhood operators on partial decisions.

Each operator returns a new partial decision, or None when it has nothing
to change. Started orders never move within their food sequence.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping

import numpy as np

from ghostkitchen.model import Facility, State
from ghostkitchen.solver.partial import PartialDecision

type Operator = Callable[
    [PartialDecision, State, Facility, np.random.Generator], PartialDecision | None
]

type Trips = tuple[tuple[int, ...], ...]


def _movable(state: State, sequence: tuple[int, ...]) -> list[int]:
    """Positions of not-yet-started orders."""
    return [k for k, i in enumerate(sequence) if not state.is_started(i)]


def _swap[T](items: tuple[T, ...], a: int, b: int) -> tuple[T, ...]:
    swapped = list(items)
    swapped[a], swapped[b] = swapped[b], swapped[a]
    return tuple(swapped)


def urgency(state: State, facility: Facility, order_id: int) -> float:
    """Latest on-time departure times preparation time; small means urgent."""
    order = state.orders[order_id]
    deadline = order.t_order + facility.config.promise - facility.direct_travel(order)
    return max(0.0, deadline) * order.t_prep


# =============================================================================
# Food sequence operators
# =============================================================================


def advance_urgent(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    """Swap an order with its predecessor, preferring urgent orders.

    A food type with a candidate is drawn uniformly. Within it an order is
    picked with weight ``1 - w / sum(w)`` over its urgency ``w``,
    renormalized; uniformly when every urgency is zero.
    """
    eligible: list[tuple[int, list[int]]] = []
    for food_type, sequence in enumerate(partial.food_sequences):
        movable = set(_movable(state, sequence))
        positions = [k for k in sorted(movable) if k - 1 in movable]
        if positions:
            eligible.append((food_type, positions))
    if not eligible:
        return None
    food_type, positions = eligible[int(rng.integers(len(eligible)))]
    sequence = partial.food_sequences[food_type]
    weights = np.array([urgency(state, facility, sequence[k]) for k in positions])
    total = float(weights.sum())
    if total > 0 and len(positions) > 1:
        weights = 1.0 - weights / total
        probabilities = weights / weights.sum()
    else:
        probabilities = np.full(len(positions), 1.0 / len(positions))
    k = positions[int(rng.choice(len(positions), p=probabilities))]
    return partial.with_food_sequence(food_type, _swap(sequence, k - 1, k))


def swap_same_type(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    """Swap two random movable orders of one food type."""
    eligible = [
        (food_type, movable)
        for food_type, sequence in enumerate(partial.food_sequences)
        if len(movable := _movable(state, sequence)) >= 2
    ]
    if not eligible:
        return None
    food_type, movable = eligible[int(rng.integers(len(eligible)))]
    a, b = rng.choice(len(movable), size=2, replace=False)
    sequence = _swap(partial.food_sequences[food_type], movable[int(a)], movable[int(b)])
    return partial.with_food_sequence(food_type, sequence)


# =============================================================================
# Trip operators
# =============================================================================


def sort_by_driving(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    """Sort three consecutive trips by their driving time."""
    trips = partial.trips
    if len(trips) < 3:
        return None
    k = int(rng.integers(len(trips) - 2))

    def driving(trip: tuple[int, ...]) -> float:
        return facility.timing([state.orders[i] for i in trip]).driving

    block = tuple(sorted(trips[k : k + 3], key=driving))
    if block == trips[k : k + 3]:
        return None
    return partial.with_trips((*trips[:k], *block, *trips[k + 3 :]))


def swap_adjacent_trips(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    trips = partial.trips
    if len(trips) < 2:
        return None
    k = int(rng.integers(len(trips) - 1))
    return partial.with_trips(_swap(trips, k, k + 1))


def merge_adjacent_trips(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    trips = partial.trips
    capacity = facility.config.capacity
    fits = [k for k in range(len(trips) - 1) if len(trips[k]) + len(trips[k + 1]) <= capacity]
    if not fits:
        return None
    k = fits[int(rng.integers(len(fits)))]
    merged: Trips = (*trips[:k], trips[k] + trips[k + 1], *trips[k + 2 :])
    return partial.with_trips(merged)


def split_trip(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    """Split a trip into its first order and the rest."""
    trips = partial.trips
    multi = [k for k, trip in enumerate(trips) if len(trip) >= 2]
    if not multi:
        return None
    k = multi[int(rng.integers(len(multi)))]
    split: Trips = (*trips[:k], trips[k][:1], trips[k][1:], *trips[k + 1 :])
    return partial.with_trips(split)


def shuffle_trip(
    partial: PartialDecision, state: State, facility: Facility, rng: np.random.Generator
) -> PartialDecision | None:
    """Randomly reorder the stops of one trip."""
    trips = partial.trips
    multi = [k for k, trip in enumerate(trips) if len(trip) >= 2]
    if not multi:
        return None
    k = multi[int(rng.integers(len(multi)))]
    stops = tuple(int(i) for i in rng.permutation(trips[k]))
    if stops == trips[k]:
        return None
    return partial.with_trips((*trips[:k], stops, *trips[k + 1 :]))


OPERATORS: Mapping[int, Operator] = {
    1: advance_urgent,
    2: swap_same_type,
    3: sort_by_driving,
    4: swap_adjacent_trips,
    5: merge_adjacent_trips,
    6: split_trip,
    7: shuffle_trip,
}


def apply_operator(
    operator: int,
    partial: PartialDecision,
    state: State,
    facility: Facility,
    rng: np.random.Generator,
) -> PartialDecision | None:
    """Apply operator 1 to 7; None means the operator found nothing to do."""
    try:
        move = OPERATORS[operator]
    except KeyError:
        raise ValueError(f"unknown operator {operator}") from None
    return move(partial, state, facility, rng)

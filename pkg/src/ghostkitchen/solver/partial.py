"""Partial and condensed decisions: sequences without cook or vehicle identities."""

from __future__ import annotations

import dataclasses as dc
from collections.abc import Mapping

from ghostkitchen._defaults import EPS
from ghostkitchen.model import Facility, Plan, State


@dc.dataclass(frozen=True)
class PartialDecision:
    """Per-food-type preparation sequences plus one flat trip sequence."""

    food_sequences: tuple[tuple[int, ...], ...]
    trips: tuple[tuple[int, ...], ...]

    def with_food_sequence(self, food_type: int, sequence: tuple[int, ...]) -> PartialDecision:
        sequences = list(self.food_sequences)
        sequences[food_type] = sequence
        return dc.replace(self, food_sequences=tuple(sequences))

    def with_trips(self, trips: tuple[tuple[int, ...], ...]) -> PartialDecision:
        return dc.replace(self, trips=trips)

    def order_ids(self) -> list[int]:
        return sorted(i for trip in self.trips for i in trip)

    def check(self, state: State, facility: Facility) -> None:
        """Raise ValueError unless this is a well-formed decision skeleton for ``state``."""
        config = facility.config
        open_ids = sorted(state.orders)
        if len(self.food_sequences) != config.n_food_types:
            raise ValueError("one sequence per food type required")
        sequenced: list[int] = []
        for food_type, sequence in enumerate(self.food_sequences):
            for i in sequence:
                order = state.orders.get(i)
                if order is None:
                    raise ValueError(f"sequence holds unknown order {i}")
                if order.food_type != food_type:
                    raise ValueError(f"order {i} sequenced under food type {food_type}")
            started = [i for i in sequence if state.is_started(i)]
            if tuple(sequence[: len(started)]) != tuple(
                sorted(started, key=lambda i: (state.plan.start_times[i], i))
            ):
                raise ValueError(f"started orders of food type {food_type} must lead")
            sequenced.extend(sequence)
        if sorted(sequenced) != open_ids:
            raise ValueError("food sequences must hold every open order once")
        for trip in self.trips:
            if not 1 <= len(trip) <= config.capacity:
                raise ValueError(f"trip {trip} violates capacity {config.capacity}")
        if self.order_ids() != open_ids:
            raise ValueError("trips must hold every open order once")
        _check_started(state)


def _check_started(state: State) -> None:
    """Pinned preparations on one cook must not overlap."""
    plan = state.plan
    for cook, sequence in enumerate(plan.cook_sequences):
        started = sorted(
            (i for i in sequence if state.is_started(i)),
            key=lambda i: (plan.start_times[i], i),
        )
        for before, after in zip(started, started[1:], strict=False):
            end = plan.start_times[before] + state.orders[before].t_prep
            if plan.start_times[after] < end - EPS:
                raise ValueError(
                    f"started orders {before} and {after} overlap on cook {cook}"
                )


@dc.dataclass(frozen=True)
class CondensedDecision:
    """A partial decision together with its timing."""

    partial: PartialDecision
    start_times: Mapping[int, float]
    departures: tuple[float, ...]


def condense(state: State, plan: Plan, facility: Facility) -> CondensedDecision:
    """Drop cook and vehicle identities from a plan.

    Food sequences follow start times and the trip sequence follows
    departures; order ids break ties.
    """
    sequences: list[list[int]] = [[] for _ in range(facility.config.n_food_types)]
    for i in sorted(plan.start_times, key=lambda i: (plan.start_times[i], i)):
        sequences[state.orders[i].food_type].append(i)
    trips = sorted((trip for _, trip in plan.trips()), key=lambda t: (t.departure, t.orders))
    partial = PartialDecision(
        tuple(tuple(sequence) for sequence in sequences),
        tuple(trip.orders for trip in trips),
    )
    return CondensedDecision(
        partial, dict(plan.start_times), tuple(trip.departure for trip in trips)
    )

"""Run one day of orders through a policy and record what happened."""

from __future__ import annotations

import dataclasses as dc
import itertools
import json
import logging
import math
import typing as ty
from collections.abc import Iterator, Sequence
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ghostkitchen.errors import IncompleteEpisodeError, PlanViolationError
from ghostkitchen.model import (
    Delivery,
    DispatchedTrip,
    Facility,
    Order,
    State,
    advance,
    check_decision,
    depart,
    marginal_cost,
    plan_delay,
)
from ghostkitchen.policies import Policy
from ghostkitchen.solver import Verdict
from ghostkitchen.vfa import extract_features

logger = logging.getLogger(__name__)


@dc.dataclass(frozen=True, slots=True)
class DecisionRecord:
    index: int
    t_now: float
    open_orders: int
    new_order: int | None
    marginal_cost: float
    planned_delay: float
    lns_accepted: int = 0
    lns_improvements: int = 0
    lns_infeasible: int = 0


@dc.dataclass
class EpisodeLog:
    day: int
    policy: str
    decisions: list[DecisionRecord] = dc.field(default_factory=list[DecisionRecord])
    deliveries: list[Delivery] = dc.field(default_factory=list[Delivery])
    trips: list[DispatchedTrip] = dc.field(default_factory=list[DispatchedTrip])
    features: list[npt.NDArray[np.float64]] = dc.field(
        default_factory=list[npt.NDArray[np.float64]]
    )
    """Post-decision features, one per decision, when requested."""
    pdft: list[tuple[Verdict, int]] = dc.field(default_factory=list[tuple[Verdict, int]])
    complete: bool = False

    def cost_to_go(self) -> list[float]:
        """Marginal cost incurred after each decision point."""
        remaining: list[float] = []
        total = 0.0
        for record in reversed(self.decisions):
            remaining.append(total)
            total += record.marginal_cost
        remaining.reverse()
        return remaining


class Ledger(ty.NamedTuple):
    marginal: float
    realized: float

    def balanced(self, tolerance: float = 1e-6) -> bool:
        return math.isclose(self.marginal, self.realized, rel_tol=0.0, abs_tol=tolerance)


def realized_delay_ledger(log: EpisodeLog) -> Ledger:
    """Sum of marginal costs next to the sum of realized delays.

    The two agree for every complete episode.
    """
    if not log.complete:
        raise IncompleteEpisodeError(f"episode of day {log.day} did not finish")
    return Ledger(
        math.fsum(record.marginal_cost for record in log.decisions),
        math.fsum(delivery.delay for delivery in log.deliveries),
    )


def decision_rng(seed: int, day: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, day, index])


def run_episode(
    orders: Sequence[Order],
    policy: Policy,
    facility: Facility,
    *,
    seed: int = 0,
    day: int = 0,
    record_features: bool = False,
) -> EpisodeLog:
    """Simulate one day: a decision per order, a final one at the end of capture.

    ``orders`` must be sorted by placement time. Raises PlanViolationError if
    the policy ever returns an infeasible decision.
    """
    log = EpisodeLog(day, policy.label)
    if not orders:
        log.complete = True
        return log
    if any(b.t_order < a.t_order for a, b in itertools.pairwise(orders)):
        raise ValueError("orders must be sorted by placement time")

    state = State.initial(orders[0], facility)
    for index in range(len(orders) + 1):
        outcome = policy.decide(state, facility, decision_rng(seed, day, index))
        decision = outcome.decision
        try:
            check_decision(state, decision, facility)
        except PlanViolationError:
            logger.error("policy %s broke plan validity at %.2f", policy.label, state.t_now)
            raise
        cost = marginal_cost(state.plan, decision.plan, state.orders, facility)
        stats = outcome.search.stats if outcome.search is not None else None
        log.decisions.append(
            DecisionRecord(
                index=index,
                t_now=state.t_now,
                open_orders=len(state.orders),
                new_order=state.new_order.id if state.new_order is not None else None,
                marginal_cost=cost,
                planned_delay=plan_delay(decision.plan, state.orders, facility),
                lns_accepted=stats.accepted if stats else 0,
                lns_improvements=stats.improvements if stats else 0,
                lns_infeasible=stats.infeasible if stats else 0,
            )
        )
        if stats is not None:
            log.pdft.extend(stats.pdft)
        if record_features:
            log.features.append(extract_features(state, decision.plan, facility))
        logger.debug(
            "t=%.2f open=%d marginal=%.3f", state.t_now, len(state.orders), cost
        )

        if index == len(orders):
            departure = depart(decision.plan, state.orders, None, facility)
        else:
            upcoming = orders[index + 1] if index + 1 < len(orders) else None
            state, departure = advance(state, decision, upcoming, facility)
        log.deliveries.extend(departure.deliveries)
        log.trips.extend(departure.trips)

    log.complete = True
    if log.deliveries:
        mean = sum(d.delay for d in log.deliveries) / len(log.deliveries)
        logger.info(
            "day %d %s: %d orders, mean delay %.2f", day, policy.label, len(orders), mean
        )
    return log


# =============================================================================
# Episode log files
# =============================================================================


def _records(log: EpisodeLog) -> Iterator[dict[str, ty.Any]]:
    for decision in log.decisions:
        yield {"type": "decision", "day": log.day, "policy": log.policy, **dc.asdict(decision)}
    for delivery in log.deliveries:
        yield {"type": "delivery", "day": log.day, "policy": log.policy, **dc.asdict(delivery)}
    for trip in log.trips:
        yield {"type": "trip", "day": log.day, "policy": log.policy, **dc.asdict(trip)}


def write_episode_log(path: Path, logs: Sequence[EpisodeLog]) -> None:
    """One JSON object per line: decisions, then deliveries, then trips, per day."""
    with path.open("w") as f:
        for log in logs:
            for record in _records(log):
                f.write(json.dumps(record, sort_keys=True) + "\n")

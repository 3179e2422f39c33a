"""Large neighbourhood search over partial decisions."""

from __future__ import annotations

import dataclasses as dc
import logging
import typing as ty

import numpy as np
import numpy.typing as npt

from ghostkitchen._defaults import EPS
from ghostkitchen.config import LnsConfig
from ghostkitchen.model import Decision, Facility, Plan, State, marginal_cost
from ghostkitchen.solver.fifo import fifo_insert
from ghostkitchen.solver.operators import OPERATORS, apply_operator
from ghostkitchen.solver.partial import PartialDecision, condense
from ghostkitchen.solver.pdft import Verdict, run_pdft
from ghostkitchen.vfa.features import extract_features

logger = logging.getLogger(__name__)


# =============================================================================
# Evaluators
# =============================================================================


class DecisionEvaluator(ty.Protocol):
    def __call__(self, state: State, plan: Plan) -> float: ...


class ValueModel(ty.Protocol):
    def predict(self, features: npt.ArrayLike) -> float: ...


@dc.dataclass(frozen=True)
class ImmediateCost:
    """Marginal planned delay of the decision."""

    facility: Facility

    def __call__(self, state: State, plan: Plan) -> float:
        return marginal_cost(state.plan, plan, state.orders, self.facility)


@dc.dataclass(frozen=True)
class VfaCost:
    """Marginal planned delay plus the predicted cost-to-go after the decision."""

    facility: Facility
    model: ValueModel

    def __call__(self, state: State, plan: Plan) -> float:
        immediate = marginal_cost(state.plan, plan, state.orders, self.facility)
        return immediate + self.model.predict(extract_features(state, plan, self.facility))


# =============================================================================
# Search
# =============================================================================


@dc.dataclass(frozen=True, slots=True)
class IterationRecord:
    iteration: int
    operator: int
    verdict: Verdict | None
    """None when the operator had nothing to change."""
    cost: float | None
    accepted: bool


@dc.dataclass
class SearchStats:
    iterations: int = 0
    noops: int = 0
    infeasible: int = 0
    accepted: int = 0
    improvements: int = 0
    pdft: list[tuple[Verdict, int]] = dc.field(default_factory=list[tuple[Verdict, int]])
    trace: list[IterationRecord] = dc.field(default_factory=list[IterationRecord])


@dc.dataclass(frozen=True)
class SearchResult:
    decision: Decision
    cost: float
    fifo_cost: float
    stats: SearchStats


def expand(
    state: State, partial: PartialDecision, facility: Facility, max_iter: int = 25
) -> Decision | None:
    """Earliest-timed decision realizing ``partial``, or None."""
    result = run_pdft(state, partial, facility, max_iter)
    return Decision(result.plan) if result.plan is not None else None


def search(
    state: State,
    facility: Facility,
    config: LnsConfig,
    evaluator: DecisionEvaluator,
    rng: np.random.Generator,
    *,
    trace: bool = False,
) -> SearchResult:
    """Improve the FIFO decision by random operators.

    Better candidates always replace the current one; worse ones with
    ``config.accept_probability``. The best decision seen is returned.
    """
    initial = fifo_insert(state, facility)
    current = condense(state, initial.plan, facility).partial
    current_cost = evaluator(state, initial.plan)
    best, best_cost = initial, current_cost
    fifo_cost = current_cost
    stats = SearchStats()

    for iteration in range(config.iterations):
        stats.iterations += 1
        operator = int(rng.integers(1, len(OPERATORS) + 1))
        candidate = apply_operator(operator, current, state, facility, rng)
        if candidate is None:
            stats.noops += 1
            if trace:
                stats.trace.append(IterationRecord(iteration, operator, None, None, False))
            continue
        result = run_pdft(state, candidate, facility, config.pdft_max_iter)
        stats.pdft.append((result.verdict, result.iterations))
        if result.plan is None:
            stats.infeasible += 1
            if trace:
                stats.trace.append(
                    IterationRecord(iteration, operator, result.verdict, None, False)
                )
            continue
        cost = evaluator(state, result.plan)
        accepted = True
        if cost < current_cost - EPS:
            stats.improvements += 1
            if cost < best_cost - EPS:
                best, best_cost = Decision(result.plan), cost
        elif rng.random() >= config.accept_probability:
            accepted = False
        if accepted:
            stats.accepted += 1
            current, current_cost = candidate, cost
        if trace:
            stats.trace.append(IterationRecord(iteration, operator, result.verdict, cost, accepted))

    logger.debug(
        "lns at %.1f: %d accepted, %d improving, %d infeasible, %d no-op; cost %.2f -> %.2f",
        state.t_now,
        stats.accepted,
        stats.improvements,
        stats.infeasible,
        stats.noops,
        fifo_cost,
        best_cost,
    )
    return SearchResult(best, best_cost, fifo_cost, stats)

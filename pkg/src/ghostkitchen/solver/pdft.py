"""Partial decision feasibility and timing.

Turns a partial decision (per-food-type order sequences plus one trip
sequence) into a full plan with the earliest feasible start and departure
times, or proves that no timing exists.

Orders are decided food type by food type, then trips in sequence order.
Every decided value is a lower bound over all feasible timings of the
partial decision: cooks and vehicles of one kind are interchangeable, so
the eligibility multisets do not depend on which one is picked. When a
window turns out empty, the current lower bounds on trip departures are
kept, the blocked trip's bound is raised, and the search returns to the
earliest decided order that bounds the blocked trips from above. Bounds
only grow, so the first complete pass is the least feasible timing.
"""

from __future__ import annotations

import dataclasses as dc
import logging
import math
import typing as ty
from collections.abc import Iterable, Mapping, Sequence
from enum import StrEnum

from ghostkitchen._defaults import EPS
from ghostkitchen.model import Facility, Plan, State, Trip
from ghostkitchen.solver.partial import CondensedDecision, PartialDecision

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 25

_RAISE_TOL = 1e-7
"""Two raises are the same step when they differ by less than this, in minutes."""


class Verdict(StrEnum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"


class Window(ty.NamedTuple):
    earliest: float
    latest: float

    @property
    def empty(self) -> bool:
        return self.earliest > self.latest + EPS


@dc.dataclass
class AtpState:
    """Scratch state of one PDFT pass.

    ``lower`` and ``upper`` are each trip's own departure bounds, before
    propagation along the trip sequence.
    """

    cook_eligibility: list[float]
    vehicle_eligibility: list[float]
    lower: list[float]
    upper: list[float]
    decision_index: int = 0

    def copy(self) -> AtpState:
        return AtpState(
            list(self.cook_eligibility),
            list(self.vehicle_eligibility),
            list(self.lower),
            list(self.upper),
            self.decision_index,
        )


@dc.dataclass(frozen=True, slots=True)
class TraceEvent:
    kind: ty.Literal["order", "trip", "backtrack"]
    index: int
    """Decision index for orders and backtracks, sequence index for trips."""
    subject: int
    """Order id, vehicle, or the decision index returned to."""
    time: float


@dc.dataclass(frozen=True)
class PdftResult:
    verdict: Verdict
    iterations: int
    plan: Plan | None = None
    start_times: Mapping[int, float] = dc.field(default_factory=dict[int, float])
    departures: tuple[float, ...] = ()
    cooks: Mapping[int, int] = dc.field(default_factory=dict[int, int])
    vehicles: tuple[int, ...] = ()
    total_delay: float = math.inf
    trace: tuple[TraceEvent, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE

    def condensed(self, partial: PartialDecision) -> CondensedDecision:
        return CondensedDecision(partial, dict(self.start_times), self.departures)


class _Blocked(ty.NamedTuple):
    """Where a pass got stuck: trips from ``first_trip`` on are blocked."""

    first_trip: int
    trip: int
    floor: float
    decided: int


# =============================================================================
# Solver
# =============================================================================


class PdftSolver:
    """PDFT for one state and one partial decision."""

    def __init__(self, state: State, partial: PartialDecision, facility: Facility) -> None:
        partial.check(state, facility)
        self.state = state
        self.partial = partial
        self.facility = facility
        config = facility.config
        orders = state.orders

        self.trip_of: dict[int, int] = {}
        self.offset: dict[int, float] = {}
        self.duration: list[float] = []
        for q, trip in enumerate(partial.trips):
            timing = facility.timing([orders[i] for i in trip])
            self.duration.append(timing.duration)
            for i, arrival in zip(trip, timing.arrivals, strict=True):
                self.trip_of[i] = q
                self.offset[i] = arrival

        started = state.started()
        self.pinned_start = {i: state.plan.start_times[i] for i in started}
        cook_of = state.plan.cook_of()
        self.pinned_cook = {i: cook_of[i] for i in started}
        self.decisions: tuple[int, ...] = tuple(
            i for sequence in partial.food_sequences for i in sequence if i not in started
        )

        n_trips = len(partial.trips)
        self.static_lower = [state.t_now] * n_trips
        self.static_upper = [config.operation_horizon] * n_trips
        for i in started:
            q = self.trip_of[i]
            order = orders[i]
            ready = self.pinned_start[i] + order.t_prep
            self.static_lower[q] = max(self.static_lower[q], ready)
            self.static_upper[q] = min(self.static_upper[q], self._fresh_until(i, ready))
        self.static_upper_eff = _suffix_min(self.static_upper)

    def never_fresh(self) -> int | None:
        """First order whose stop is farther into its trip than it stays fresh."""
        orders = self.state.orders
        return next(
            (
                i
                for i in sorted(self.trip_of, key=lambda i: (self.trip_of[i], i))
                if self.offset[i] > self.facility.freshness(orders[i]) + EPS
            ),
            None,
        )

    @property
    def n_trips(self) -> int:
        return len(self.partial.trips)

    def _fresh_until(self, order_id: int, ready: float) -> float:
        """Latest departure of the order's trip keeping it fresh."""
        order = self.state.orders[order_id]
        return ready + self.facility.freshness(order) - self.offset[order_id]

    def initial_state(self) -> AtpState:
        t_now = self.state.t_now
        cooks = [t_now] * self.facility.n_cooks
        for i, cook in self.pinned_cook.items():
            finish = self.pinned_start[i] + self.state.orders[i].t_prep
            cooks[cook] = max(cooks[cook], finish)
        vehicles = [max(t_now, back) for back in self.state.plan.return_times]
        first_vehicle = min(vehicles, default=t_now)
        lower = [max(first_vehicle, bound) for bound in self.static_lower]
        return AtpState(cooks, vehicles, lower, list(self.static_upper))

    def effective(
        self, lower: Sequence[float], upper: Sequence[float]
    ) -> tuple[list[float], list[float]]:
        """Propagate own bounds along the trip sequence.

        Departures are nondecreasing, and among any ``|V| + 1`` consecutive
        trips two share a vehicle.
        """
        window = self.facility.n_vehicles + 1
        lower_eff: list[float] = []
        for m, own in enumerate(lower):
            value = own if m == 0 else max(own, lower_eff[m - 1])
            if m >= window:
                value = max(
                    value,
                    min(lower_eff[k] + self.duration[k] for k in range(m - window, m)),
                )
            lower_eff.append(value)
        return lower_eff, _suffix_min(upper)

    def window(self, atp: AtpState, order_id: int) -> Window:
        """Feasible start window of an undecided order under ``atp``."""
        order = self.state.orders[order_id]
        q = self.trip_of[order_id]
        p = order.t_prep
        lower_eff, upper_eff = self.effective(atp.lower, atp.upper)
        cooks = self.facility.cooks_by_type[order.food_type]
        earliest = max(
            min(atp.cook_eligibility[c] for c in cooks),
            lower_eff[q] + self.offset[order_id] - p - self.facility.freshness(order),
        )
        latest = upper_eff[q] - p

        # A trip within |V| + 1 positions after q may have no other vehicle
        # to wait for than the one that drove q.
        span = self.facility.n_vehicles + 1
        for m in range(q + 1, min(self.n_trips, q + span + 1)):
            if m < span:
                continue
            others = min(
                (lower_eff[k] + self.duration[k] for k in range(m - span, m) if k != q),
                default=math.inf,
            )
            if others <= upper_eff[m] + EPS:
                continue
            if lower_eff[q] + self.duration[q] > upper_eff[m] + EPS:
                latest = -math.inf
            else:
                latest = min(latest, upper_eff[m] - self.duration[q] - p)
        return Window(earliest, latest)

    # -------------------------------------------------------------------------

    def _rebuild(
        self, raised: Sequence[float], cooks: Sequence[float], starts: Sequence[float]
    ) -> AtpState:
        """Own bounds after the first ``len(starts)`` decisions."""
        lower = list(raised)
        upper = list(self.static_upper)
        for i, start in zip(self.decisions, starts, strict=False):
            q = self.trip_of[i]
            ready = start + self.state.orders[i].t_prep
            lower[q] = max(lower[q], ready)
            upper[q] = min(upper[q], self._fresh_until(i, ready))
        vehicles = self.initial_state().vehicle_eligibility
        return AtpState(list(cooks), vehicles, lower, upper, len(starts))

    def _decide_order(self, atp: AtpState, order_id: int, start: float) -> int:
        order = self.state.orders[order_id]
        cooks = self.facility.cooks_by_type[order.food_type]
        chosen = next(c for c in cooks if atp.cook_eligibility[c] <= start + EPS)
        for c in cooks:
            atp.cook_eligibility[c] = max(atp.cook_eligibility[c], start)
        atp.cook_eligibility[chosen] = start + order.t_prep
        q = self.trip_of[order_id]
        ready = start + order.t_prep
        atp.lower[q] = max(atp.lower[q], ready)
        atp.upper[q] = min(atp.upper[q], self._fresh_until(order_id, ready))
        atp.decision_index += 1
        return chosen

    def run(self, max_iter: int = DEFAULT_MAX_ITER, *, trace: bool = False) -> PdftResult:
        events: list[TraceEvent] | None = [] if trace else None
        stale = self.never_fresh()
        if stale is not None:
            logger.debug("pdft: order %d is stale at its stop even when ready", stale)
            return self._fail(Verdict.INFEASIBLE, 0, events)
        atp = self.initial_state()
        lower_eff, upper_eff = self.effective(atp.lower, atp.upper)
        if _first_inversion(lower_eff, upper_eff) is not None:
            return self._fail(Verdict.INFEASIBLE, 0, events)

        raised = list(atp.lower)
        snapshots: list[list[float]] = []
        starts: list[float] = []
        cooks: list[int] = []
        steps: dict[tuple[int, int, int], list[float]] = {}
        iterations = 0

        while True:
            blocked = self._order_phase(atp, snapshots, starts, cooks, events)
            if blocked is None:
                departures, vehicles, blocked = self._trip_phase(atp, events)
                if blocked is None:
                    return self._success(starts, cooks, departures, vehicles, iterations, events)

            lower_eff, _ = self.effective(atp.lower, atp.upper)
            new_raised = [max(r, value) for r, value in zip(raised, lower_eff, strict=True)]
            new_raised[blocked.trip] = max(new_raised[blocked.trip], blocked.floor)
            bound_eff, _ = self.effective(new_raised, self.static_upper)
            if _first_inversion(bound_eff, self.static_upper_eff) is not None:
                return self._fail(Verdict.INFEASIBLE, iterations, events)
            target = next(
                (
                    k
                    for k in range(blocked.decided)
                    if self.trip_of[self.decisions[k]] >= blocked.first_trip
                ),
                None,
            )
            if target is None:
                return self._fail(Verdict.INFEASIBLE, iterations, events)
            if not any(
                new > old + EPS for new, old in zip(new_raised, raised, strict=True)
            ):
                return self._fail(Verdict.INFEASIBLE, iterations, events)
            # The same block met again with the same raise only shifts every
            # bound by a constant, which no later pass can undo.
            step = [new - old for new, old in zip(new_raised, raised, strict=True)]
            key = (blocked.trip, blocked.first_trip, target)
            previous = steps.get(key)
            if previous is not None and all(
                abs(a - b) <= _RAISE_TOL for a, b in zip(step, previous, strict=True)
            ):
                logger.debug("pdft: trip %d raised by the same step twice", blocked.trip)
                return self._fail(Verdict.INFEASIBLE, iterations, events)
            steps[key] = step
            iterations += 1
            if iterations > max_iter:
                return self._fail(Verdict.ITERATION_LIMIT, iterations - 1, events)

            raised = new_raised
            del starts[target:], cooks[target:]
            atp = self._rebuild(raised, snapshots[target], starts)
            if events is not None:
                events.append(TraceEvent("backtrack", blocked.decided, target, blocked.floor))

    def _order_phase(
        self,
        atp: AtpState,
        snapshots: list[list[float]],
        starts: list[float],
        cooks: list[int],
        events: list[TraceEvent] | None,
    ) -> _Blocked | None:
        while atp.decision_index < len(self.decisions):
            n = atp.decision_index
            if n < len(snapshots):
                snapshots[n] = list(atp.cook_eligibility)
            else:
                snapshots.append(list(atp.cook_eligibility))
            i = self.decisions[n]
            q = self.trip_of[i]
            p = self.state.orders[i].t_prep
            window = self.window(atp, i)
            if window.empty:
                return _Blocked(q, q, window.earliest + p, n)
            cooks.append(self._decide_order(atp, i, window.earliest))
            starts.append(window.earliest)
            if events is not None:
                events.append(TraceEvent("order", n, i, window.earliest))
            inverted = _first_inversion(*self.effective(atp.lower, atp.upper))
            if inverted is not None:
                return _Blocked(min(q, inverted), q, window.earliest + p, n + 1)
        return None

    def _trip_phase(
        self, atp: AtpState, events: list[TraceEvent] | None
    ) -> tuple[list[float], list[int], _Blocked | None]:
        lower_eff, upper_eff = self.effective(atp.lower, atp.upper)
        vehicles = list(atp.vehicle_eligibility)
        departures: list[float] = []
        assigned: list[int] = []
        for m in range(self.n_trips):
            departure = max(lower_eff[m], min(vehicles))
            if departure > upper_eff[m] + EPS:
                return departures, assigned, _Blocked(m, m, departure, len(self.decisions))
            vehicle = next(v for v, free in enumerate(vehicles) if free <= departure + EPS)
            vehicles = [max(free, departure) for free in vehicles]
            vehicles[vehicle] = departure + self.duration[m]
            departures.append(departure)
            assigned.append(vehicle)
            if events is not None:
                events.append(TraceEvent("trip", m, vehicle, departure))
        atp.vehicle_eligibility = vehicles
        return departures, assigned, None

    # -------------------------------------------------------------------------

    def _fail(
        self, verdict: Verdict, iterations: int, events: list[TraceEvent] | None
    ) -> PdftResult:
        logger.debug("pdft %s after %d iterations", verdict.value, iterations)
        return PdftResult(verdict, iterations, trace=tuple(events or ()))

    def _success(
        self,
        starts: Sequence[float],
        cooks: Sequence[int],
        departures: Sequence[float],
        vehicles: Sequence[int],
        iterations: int,
        events: list[TraceEvent] | None,
    ) -> PdftResult:
        start_times = dict(self.pinned_start)
        cook_of = dict(self.pinned_cook)
        for i, start, cook in zip(self.decisions, starts, cooks, strict=True):
            start_times[i] = start
            cook_of[i] = cook

        by_cook: list[list[int]] = [[] for _ in range(self.facility.n_cooks)]
        for i in sorted(start_times, key=lambda i: (start_times[i], i)):
            by_cook[cook_of[i]].append(i)
        by_vehicle: list[list[Trip]] = [[] for _ in range(self.facility.n_vehicles)]
        for trip, departure, vehicle in zip(
            self.partial.trips, departures, vehicles, strict=True
        ):
            by_vehicle[vehicle].append(Trip(trip, departure))
        plan = Plan(
            cook_sequences=tuple(tuple(sequence) for sequence in by_cook),
            start_times=start_times,
            vehicle_trips=tuple(tuple(trips) for trips in by_vehicle),
            return_times=self.state.plan.return_times,
        )

        orders = self.state.orders
        total = 0.0
        for i, q in self.trip_of.items():
            total += self.facility.lateness(orders[i], departures[q] + self.offset[i])
        return PdftResult(
            Verdict.FEASIBLE,
            iterations,
            plan,
            start_times,
            tuple(departures),
            cook_of,
            tuple(vehicles),
            total,
            tuple(events or ()),
        )


def _suffix_min(values: Sequence[float]) -> list[float]:
    result = list(values)
    for m in range(len(result) - 2, -1, -1):
        result[m] = min(result[m], result[m + 1])
    return result


def _first_inversion(lower: Sequence[float], upper: Sequence[float]) -> int | None:
    return next(
        (m for m, (lo, up) in enumerate(zip(lower, upper, strict=True)) if lo > up + EPS),
        None,
    )


# =============================================================================
# Entry points
# =============================================================================


def initial_atp_state(state: State, partial: PartialDecision, facility: Facility) -> AtpState:
    return PdftSolver(state, partial, facility).initial_state()


def feasibility_window_order(
    state: State,
    partial: PartialDecision,
    facility: Facility,
    order_id: int,
    atp: AtpState | None = None,
) -> Window | None:
    """Start window of an order, or None when no start is feasible."""
    solver = PdftSolver(state, partial, facility)
    window = solver.window(atp or solver.initial_state(), order_id)
    return None if window.empty else window


def run_pdft(
    state: State,
    partial: PartialDecision,
    facility: Facility,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    trace: bool = False,
) -> PdftResult:
    """Least feasible timing of a partial decision, if one exists.

    Raises ValueError when the partial decision does not fit the state.
    """
    return PdftSolver(state, partial, facility).run(max_iter, trace=trace)


# =============================================================================
# Termination profile
# =============================================================================


@dc.dataclass(frozen=True)
class TerminationProfile:
    """How PDFT calls ended across a run."""

    calls: int
    by_verdict: Mapping[Verdict, int]
    cumulative: tuple[float, ...]
    """Share of calls finished within k backtracks, k = 0 .. max_iter."""
    cap_hits: float

    def within(self, k: int) -> float:
        if not self.cumulative:
            return 0.0
        return self.cumulative[min(k, len(self.cumulative) - 1)]


def pdft_diagnostics(
    outcomes: Iterable[tuple[Verdict, int]], max_iter: int = DEFAULT_MAX_ITER
) -> TerminationProfile:
    """Summarize (verdict, iterations) pairs of many PDFT calls."""
    counts = [0] * (max_iter + 1)
    by_verdict = dict.fromkeys(Verdict, 0)
    calls = 0
    for verdict, iterations in outcomes:
        calls += 1
        by_verdict[verdict] += 1
        if verdict is not Verdict.ITERATION_LIMIT:
            counts[min(iterations, max_iter)] += 1
    if calls == 0:
        return TerminationProfile(0, by_verdict, (), 0.0)
    cumulative: list[float] = []
    running = 0
    for count in counts:
        running += count
        cumulative.append(running / calls)
    return TerminationProfile(
        calls, by_verdict, tuple(cumulative), by_verdict[Verdict.ITERATION_LIMIT] / calls
    )

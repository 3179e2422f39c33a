import dataclasses as dc

import pytest

from ghostkitchen.config import LnsConfig, OracleConfig, Scenario
from ghostkitchen.instances import sample_days
from ghostkitchen.model import Facility, Order, State, Trip, plan_delay, validate_plan
from ghostkitchen.oracle import AtpInstance, oracle_atp
from ghostkitchen.policies import Policy
from ghostkitchen.simulation import run_episode
from ghostkitchen.solver import (
    PartialDecision,
    PdftSolver,
    TraceEvent,
    Verdict,
    Window,
    condense,
    expand,
    feasibility_window_order,
    initial_atp_state,
    pdft_diagnostics,
    run_pdft,
)
from ghostkitchen.validation import pdft_suite
from tests.core import bundling_state, line_facility, make_plan, make_state, order

# =============================================================================
# Initial state
# =============================================================================


def test_idle_windows_span_now_to_horizon() -> None:
    """Nothing started, every vehicle idle: each trip may leave in [now, T]."""
    facility = line_facility(
        [5.0, 6.0], fleet_size=2, capture_horizon=650.0, operation_horizon=700.0
    )
    state = make_state(600.0, [order(1), order(2)], make_plan(facility, 600.0))
    partial = PartialDecision(((1, 2),), ((1,), (2,)))
    atp = initial_atp_state(state, partial, facility)
    assert atp.lower == [600.0, 600.0]
    assert atp.upper == [700.0, 700.0]
    assert atp.vehicle_eligibility == [600.0, 600.0]
    assert atp.cook_eligibility == [600.0]


def _started_state(start: float, minutes: float, returns: float) -> tuple[State, Facility]:
    facility = line_facility([minutes], capture_horizon=650.0, operation_horizon=700.0)
    plan = make_plan(facility, 600.0, cooks=[[1]], starts={1: start}, returns=[returns])
    return make_state(600.0, [order(1, t_order=start, t_prep=10.0)], plan), facility


def test_started_order_bounds_its_trip() -> None:
    """Started at 590 for 10 minutes, 8 minutes away, 20 fresh: leave by 612."""
    state, facility = _started_state(590.0, 8.0, 600.0)
    partial = PartialDecision(((1,),), ((1,),))
    solver = PdftSolver(state, partial, facility)
    assert solver.static_upper == [612.0]
    assert solver.initial_state().upper == [612.0]
    assert solver.initial_state().lower == [600.0]


def test_window_inversion_is_infeasible_at_once() -> None:
    """Fresh until 605 but no vehicle before 610: infeasible with no backtracking."""
    state, facility = _started_state(585.0, 10.0, 610.0)
    partial = PartialDecision(((1,),), ((1,),))
    result = run_pdft(state, partial, facility)
    assert result.verdict is Verdict.INFEASIBLE
    assert result.iterations == 0
    assert result.plan is None
    assert not oracle_atp(state, partial, facility).feasible


def test_stale_stop_is_infeasible_at_once() -> None:
    """A stop reached later than its food stays fresh fails before any decision."""
    facility = line_facility([10.0, -9.0])
    state = make_state(
        100.0, [order(1, t_order=100.0), order(2, t_order=100.0)], make_plan(facility, 100.0)
    )
    shared = run_pdft(state, PartialDecision(((1, 2),), ((1, 2),)), facility)
    assert shared.verdict is Verdict.INFEASIBLE
    assert shared.iterations == 0
    assert run_pdft(state, PartialDecision(((1, 2),), ((1,), (2,))), facility).feasible


def test_repeated_raise_is_infeasible() -> None:
    """One cook cannot finish both orders of a trip while the first stays fresh.

    Each backtrack moves the trip's bound by the same five minutes, so the
    second such move ends the search.
    """
    facility = line_facility([15.0, 18.0])
    state = make_state(
        100.0, [order(1, t_order=100.0), order(2, t_order=100.0)], make_plan(facility, 100.0)
    )
    partial = PartialDecision(((1, 2),), ((1, 2),))
    result = run_pdft(state, partial, facility, trace=True)
    assert result.verdict is Verdict.INFEASIBLE
    assert result.iterations == 2
    floors = [event.time for event in result.trace if event.kind == "backtrack"]
    assert floors == [120.0, 125.0]
    assert not oracle_atp(state, partial, facility).feasible


def test_malformed_partial_decision() -> None:
    """A partial decision missing an order is rejected before solving."""
    facility = line_facility([5.0, 6.0])
    state = make_state(0.0, [order(1), order(2)], make_plan(facility, 0.0))
    with pytest.raises(ValueError, match="every open order"):
        run_pdft(state, PartialDecision(((1,),), ((1,),)), facility)


# =============================================================================
# Timing
# =============================================================================


def test_single_order_earliest_everything() -> None:
    """Idle system: start now, leave when ready, delay past the promise."""
    facility = line_facility([8.0])
    new = order(1, t_order=100.0, t_prep=25.0, service=2.0)
    state = make_state(100.0, [], make_plan(facility, 100.0), new_order=new)
    partial = PartialDecision(((1,),), ((1,),))
    result = run_pdft(state, partial, facility)
    assert result.feasible
    assert result.start_times == {1: 100.0}
    assert result.departures == (125.0,)
    assert result.total_delay == pytest.approx(5.0)
    assert oracle_atp(state, partial, facility).delay == pytest.approx(5.0)


def test_start_postponed_for_freshness() -> None:
    """A vehicle back only at 150 pushes the start to keep the food fresh."""
    facility = line_facility([6.0], capture_horizon=200.0, operation_horizon=300.0)
    new = order(1, t_order=100.0, t_prep=5.0)
    state = make_state(
        100.0, [], make_plan(facility, 100.0, returns=[150.0]), new_order=new
    )
    partial = PartialDecision(((1,),), ((1,),))
    assert feasibility_window_order(state, partial, facility, 1) == Window(131.0, 295.0)
    result = run_pdft(state, partial, facility)
    assert result.start_times[1] == pytest.approx(131.0)
    assert result.departures == (150.0,)
    oracle = oracle_atp(state, partial, facility)
    assert oracle.start_times[1] == pytest.approx(131.0)


def test_shared_trip_waits_for_both_orders() -> None:
    """Two orders of one trip: the trip leaves when the later one is ready."""
    facility = line_facility([4.0, 5.0], freshness=(20.0, 20.0))
    o1 = order(1, food_type=0, t_order=100.0, t_prep=12.0)
    o2 = order(2, food_type=1, t_order=100.0, t_prep=6.0)
    state = make_state(100.0, [o1, o2], make_plan(facility, 100.0))
    partial = PartialDecision(((1,), (2,)), ((1, 2),))
    result = run_pdft(state, partial, facility)
    assert result.feasible
    assert result.departures == (112.0,)
    assert result.start_times[1] == 100.0
    # Order 2 may start any time in [100, 106]; the least start is kept.
    assert result.start_times[2] == 100.0
    assert result.plan is not None
    assert validate_plan(state, result.plan, facility) == []


def test_trace_records_every_step() -> None:
    """A traced run logs each order decision and each trip departure."""
    facility = line_facility([4.0, 5.0], freshness=(20.0, 20.0))
    state = make_state(
        100.0,
        [order(1, food_type=0, t_order=100.0), order(2, food_type=1, t_order=100.0)],
        make_plan(facility, 100.0),
    )
    partial = PartialDecision(((1,), (2,)), ((1,), (2,)))
    result = run_pdft(state, partial, facility, trace=True)
    kinds = [event.kind for event in result.trace]
    assert kinds == ["order", "order", "trip", "trip"]
    assert result.trace[0] == TraceEvent("order", 0, 1, 100.0)


def test_bundling_postpones_the_partner_order() -> None:
    """Order 5 goes before order 3 and rides with order 4, which starts later."""
    state, facility = bundling_state()
    partial = PartialDecision(((5, 3), (4,)), ((4, 5), (3,)))
    result = run_pdft(state, partial, facility)
    assert result.feasible
    assert result.start_times == {3: 114.0, 4: 104.0, 5: 100.0}
    assert result.start_times[4] > state.plan.start_times[4]
    assert result.departures == (114.0, 124.0)
    assert result.vehicles == (0, 1)
    assert result.total_delay == pytest.approx(6.0)
    assert result.plan is not None
    assert validate_plan(state, result.plan, facility) == []
    oracle = oracle_atp(state, partial, facility, OracleConfig(max_vehicles=3))
    assert oracle.delay == pytest.approx(6.0)


# =============================================================================
# Against the oracle
# =============================================================================


def test_verdicts_match_oracle(atp_instances: list[AtpInstance]) -> None:
    """PDFT and the oracle agree on feasibility, and PDFT never beats the optimum."""
    for instance in atp_instances:
        result = run_pdft(instance.state, instance.partial, instance.facility, 1000)
        oracle = oracle_atp(instance.state, instance.partial, instance.facility)
        assert result.verdict is not Verdict.ITERATION_LIMIT
        assert result.feasible == oracle.feasible
        if result.plan is not None:
            assert result.total_delay >= oracle.delay - 1e-6
            assert validate_plan(instance.state, result.plan, instance.facility) == []


def test_delays_match_oracle() -> None:
    """On seeded random instances PDFT finds the optimal delay."""
    report = pdft_suite(60, seed=11)
    assert report.checked == 60
    assert report.passed, report.failures


def test_earliest_starts_cannot_move_earlier(atp_instances: list[AtpInstance]) -> None:
    """Starting any decided order sooner breaks validity or its food sequence."""
    for instance in atp_instances:
        state, partial, facility = instance.state, instance.partial, instance.facility
        result = run_pdft(state, partial, facility, 1000)
        if result.plan is None:
            continue
        for sequence in partial.food_sequences:
            for k, i in enumerate(sequence):
                if state.is_started(i):
                    continue
                earlier = {**result.start_times, i: result.start_times[i] - 0.5}
                out_of_sequence = k > 0 and earlier[i] < earlier[sequence[k - 1]]
                plan = dc.replace(result.plan, start_times=earlier)
                assert out_of_sequence or validate_plan(state, plan, facility)


def test_later_departures_never_reduce_delay(atp_instances: list[AtpInstance]) -> None:
    """Holding a trip back can only add delay."""
    for instance in atp_instances:
        result = run_pdft(instance.state, instance.partial, instance.facility, 1000)
        if result.plan is None:
            continue
        for vehicle, trips in enumerate(result.plan.vehicle_trips):
            for k, trip in enumerate(trips):
                held = list(result.plan.vehicle_trips)
                later = Trip(trip.orders, trip.departure + 3.0)
                held[vehicle] = (*trips[:k], later, *trips[k + 1 :])
                plan = dc.replace(result.plan, vehicle_trips=tuple(held))
                delay = plan_delay(plan, instance.state.orders, instance.facility)
                assert delay >= result.total_delay - 1e-9


def test_condensed_round_trip(atp_instances: list[AtpInstance]) -> None:
    """Expanding a condensed decision and condensing the plan gives it back."""
    state, facility = bundling_state()
    partial = PartialDecision(((5, 3), (4,)), ((4, 5), (3,)))
    condensed = run_pdft(state, partial, facility).condensed(partial)
    decision = expand(state, condensed.partial, facility)
    assert decision is not None
    assert condense(state, decision.plan, facility) == condensed

    for instance in atp_instances:
        state, facility = instance.state, instance.facility
        result = run_pdft(state, instance.partial, facility, 1000)
        if result.plan is None:
            continue
        condensed = condense(state, result.plan, facility)
        departures, starts = condensed.departures, list(condensed.start_times.values())
        if len(set(departures)) < len(departures) or len(set(starts)) < len(starts):
            continue
        decision = expand(state, condensed.partial, facility, 1000)
        assert decision is not None
        assert condense(state, decision.plan, facility) == condensed


# =============================================================================
# Diagnostics
# =============================================================================


def test_diagnostics_all_immediate() -> None:
    """Calls without backtracking put all mass at zero."""
    profile = pdft_diagnostics([(Verdict.FEASIBLE, 0)] * 4, max_iter=3)
    assert profile.calls == 4
    assert profile.cumulative == (1.0, 1.0, 1.0, 1.0)
    assert profile.within(0) == 1.0
    assert profile.cap_hits == 0.0


def test_diagnostics_mixed() -> None:
    """Iteration-limit hits count as calls that never finished."""
    outcomes = [
        (Verdict.FEASIBLE, 0),
        (Verdict.INFEASIBLE, 2),
        (Verdict.ITERATION_LIMIT, 3),
        (Verdict.FEASIBLE, 1),
    ]
    profile = pdft_diagnostics(outcomes, max_iter=3)
    assert profile.cumulative == (0.25, 0.5, 0.75, 0.75)
    assert profile.cap_hits == 0.25
    assert profile.by_verdict[Verdict.FEASIBLE] == 2
    assert profile.within(10) == 0.75


def test_diagnostics_empty() -> None:
    """No calls, no profile."""
    profile = pdft_diagnostics([])
    assert profile.calls == 0
    assert profile.within(0) == 0.0


def test_termination_profile_on_search_candidates(
    desk: Scenario, desk_facility: Facility
) -> None:
    """Candidates proposed by the search rarely need more than a few backtracks."""
    outcomes: list[tuple[Verdict, int]] = []
    for day, orders in enumerate(sample_days(desk, desk_facility, seed=3, n_days=3)):
        log = run_episode(orders, Policy.integrated(LnsConfig()), desk_facility, seed=3, day=day)
        outcomes.extend(log.pdft)
    profile = pdft_diagnostics(outcomes)
    assert profile.calls > 1000
    assert profile.cap_hits <= 0.03
    assert profile.within(5) >= 0.85


def test_condensed_result() -> None:
    """A feasible result condenses back onto its partial decision."""
    facility = line_facility([8.0])
    new: Order = order(1, t_order=100.0)
    state = make_state(100.0, [], make_plan(facility, 100.0), new_order=new)
    partial = PartialDecision(((1,),), ((1,),))
    condensed = run_pdft(state, partial, facility).condensed(partial)
    assert condensed.partial == partial
    assert condensed.departures == (110.0,)

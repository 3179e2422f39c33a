import pytest

from ghostkitchen.model import Facility, Trip
from ghostkitchen.solver import PartialDecision, condense
from tests.core import line_facility, make_plan, make_state, order


@pytest.fixture
def two_type_facility() -> Facility:
    return line_facility([4.0, 5.0, 6.0], freshness=(20.0, 20.0), capacity=2)


def test_well_formed(two_type_facility: Facility) -> None:
    """Sequences per food type and trips within capacity pass."""
    orders = [order(1, food_type=0), order(2, food_type=1), order(3, food_type=0)]
    state = make_state(0.0, orders, make_plan(two_type_facility, 0.0))
    PartialDecision(((3, 1), (2,)), ((1, 2), (3,))).check(state, two_type_facility)


@pytest.mark.parametrize(
    ("partial", "problem"),
    [
        (PartialDecision(((1, 3),), ((1, 2), (3,))), "one sequence per food type"),
        (PartialDecision(((1,), (2,)), ((1, 2), (3,))), "every open order once"),
        (PartialDecision(((1, 2, 3), ()), ((1, 2), (3,))), "sequenced under food type"),
        (PartialDecision(((1, 3, 4), (2,)), ((1, 2), (3,))), "unknown order 4"),
        (PartialDecision(((1, 3), (2,)), ((1, 2, 3),)), "violates capacity"),
        (PartialDecision(((1, 3), (2,)), ((1, 2),)), "trips must hold"),
    ],
)
def test_malformed(
    two_type_facility: Facility, partial: PartialDecision, problem: str
) -> None:
    """Each structural defect is reported by name."""
    orders = [order(1, food_type=0), order(2, food_type=1), order(3, food_type=0)]
    state = make_state(0.0, orders, make_plan(two_type_facility, 0.0))
    with pytest.raises(ValueError, match=problem):
        partial.check(state, two_type_facility)


def test_started_orders_lead() -> None:
    """Orders already in preparation must come first, in start order."""
    facility = line_facility([4.0, 5.0], capacity=2)
    plan = make_plan(facility, 10.0, cooks=[[2]], starts={2: 5.0})
    state = make_state(10.0, [order(1), order(2)], plan)
    with pytest.raises(ValueError, match="must lead"):
        PartialDecision(((1, 2),), ((1, 2),)).check(state, facility)
    PartialDecision(((2, 1),), ((1, 2),)).check(state, facility)


def test_condense_orders_by_time() -> None:
    """Sequences follow start times and trips follow departures."""
    facility = line_facility(
        [4.0, 5.0, 6.0], freshness=(20.0, 20.0), cooks_per_type=(2, 1), fleet_size=2
    )
    orders = [order(1, food_type=0), order(2, food_type=1), order(3, food_type=0)]
    plan = make_plan(
        facility,
        0.0,
        cooks=[[1], [3], [2]],
        starts={1: 4.0, 2: 0.0, 3: 2.0},
        trips=[[Trip((1,), 14.0)], [Trip((3, 2), 12.0)]],
    )
    state = make_state(0.0, orders, plan)
    condensed = condense(state, plan, facility)
    assert condensed.partial == PartialDecision(((3, 1), (2,)), ((3, 2), (1,)))
    assert condensed.departures == (12.0, 14.0)
    assert condensed.start_times == {1: 4.0, 2: 0.0, 3: 2.0}


def test_overlapping_started_orders() -> None:
    """Pinned preparations that overlap on one cook are rejected."""
    facility = line_facility([4.0, 5.0], capacity=2)
    plan = make_plan(facility, 100.0, cooks=[[1, 2]], starts={1: 91.0, 2: 98.0})
    orders = [order(1, t_prep=12.0), order(2, t_prep=5.0)]
    state = make_state(100.0, orders, plan)
    with pytest.raises(ValueError, match="overlap on cook 0"):
        PartialDecision(((1, 2),), ((1, 2),)).check(state, facility)
    back_to_back = make_plan(facility, 100.0, cooks=[[1, 2]], starts={1: 86.0, 2: 98.0})
    PartialDecision(((1, 2),), ((1, 2),)).check(make_state(100.0, orders, back_to_back), facility)

from ghostkitchen.config import LnsConfig
from ghostkitchen.model import Facility, Order
from ghostkitchen.policies import Policy
from ghostkitchen.runner import run_days, run_days_sync, run_policies


async def test_days_come_back_in_order(
    short_day: list[Order], desk_facility: Facility
) -> None:
    """Each log carries its day index, in input order."""
    days = [short_day[:4], short_day[4:8], short_day[8:]]
    logs = await run_days(days, Policy.fifo(), desk_facility, seed=0, first_day=10)
    assert [log.day for log in logs] == [10, 11, 12]
    assert [len(log.deliveries) for log in logs] == [4, 4, 4]


async def test_no_days(desk_facility: Facility) -> None:
    """Nothing to run, nothing returned."""
    assert await run_days([], Policy.fifo(), desk_facility, seed=0) == []


async def test_policies_share_days(short_day: list[Order], desk_facility: Facility) -> None:
    """Every policy sees the same days, keyed by label."""
    policies = [Policy.fifo(), Policy.integrated(LnsConfig(iterations=3))]
    results = await run_policies([short_day[:6]], policies, desk_facility, seed=1)
    assert list(results) == ["fifo", "integrated"]
    assert all(len(logs) == 1 for logs in results.values())


def test_worker_processes_match_in_process(
    short_day: list[Order], desk_facility: Facility
) -> None:
    """Worker processes produce the same days as a single worker."""
    days = [short_day[:6], short_day[6:]]
    policy = Policy.integrated(LnsConfig(iterations=3))
    single = run_days_sync(days, policy, desk_facility, seed=2)
    pooled = run_days_sync(days, policy, desk_facility, seed=2, jobs=2)
    assert [log.deliveries for log in single] == [log.deliveries for log in pooled]

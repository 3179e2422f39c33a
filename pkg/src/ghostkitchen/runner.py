"""Run many simulated days concurrently.

Days run in worker processes; results come back in day order whatever
the completion order.
"""

from __future__ import annotations

import asyncio
import functools
import logging
from collections.abc import Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor

from ghostkitchen.model import Facility, Order
from ghostkitchen.policies import Policy
from ghostkitchen.simulation import EpisodeLog, run_episode

logger = logging.getLogger(__name__)


def _executor(jobs: int) -> Executor:
    if jobs > 1:
        return ProcessPoolExecutor(max_workers=jobs)
    return ThreadPoolExecutor(max_workers=1)


async def run_days(
    days: Sequence[Sequence[Order]],
    policy: Policy,
    facility: Facility,
    *,
    seed: int,
    jobs: int = 1,
    first_day: int = 0,
    record_features: bool = False,
) -> list[EpisodeLog]:
    """Simulate ``days`` under ``policy``; day k gets index ``first_day + k``."""
    if not days:
        return []
    loop = asyncio.get_running_loop()
    with _executor(jobs) as executor:
        pending = [
            loop.run_in_executor(
                executor,
                functools.partial(
                    run_episode,
                    list(orders),
                    policy,
                    facility,
                    seed=seed,
                    day=first_day + offset,
                    record_features=record_features,
                ),
            )
            for offset, orders in enumerate(days)
        ]
        logs = list(await asyncio.gather(*pending))
    logger.info("%s: %d days done", policy.label, len(logs))
    return logs


async def run_policies(
    days: Sequence[Sequence[Order]],
    policies: Sequence[Policy],
    facility: Facility,
    *,
    seed: int,
    jobs: int = 1,
) -> dict[str, list[EpisodeLog]]:
    """Every policy on the same days, one policy after the other."""
    results: dict[str, list[EpisodeLog]] = {}
    for policy in policies:
        results[policy.label] = await run_days(days, policy, facility, seed=seed, jobs=jobs)
    return results


def run_days_sync(
    days: Sequence[Sequence[Order]],
    policy: Policy,
    facility: Facility,
    *,
    seed: int,
    jobs: int = 1,
    first_day: int = 0,
    record_features: bool = False,
) -> list[EpisodeLog]:
    return asyncio.run(
        run_days(
            days,
            policy,
            facility,
            seed=seed,
            jobs=jobs,
            first_day=first_day,
            record_features=record_features,
        )
    )

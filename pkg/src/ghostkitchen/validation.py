"""Self-checks run by ``ghostkitchen validate``.

Each suite draws its own seeded instances and returns a SuiteReport; none
of them raises on a failed check.
"""

from __future__ import annotations

import dataclasses as dc
import logging
from collections.abc import Callable, Mapping

import numpy as np
import numpy.typing as npt

from ghostkitchen.config import LnsConfig, OracleConfig
from ghostkitchen.instances import build_facility, preset, sample_days
from ghostkitchen.kpi import freshness_violations
from ghostkitchen.model import validate_plan
from ghostkitchen.oracle import (
    condensed_witness,
    oracle_atp,
    random_atp_instance,
    sorted_preparation_instance,
    sorted_preparation_witness,
    spt_departure_instance,
    spt_departure_witness,
)
from ghostkitchen.policies import Policy
from ghostkitchen.simulation import realized_delay_ledger, run_episode
from ghostkitchen.solver import Verdict, run_pdft
from ghostkitchen.vfa import ValueNetwork

logger = logging.getLogger(__name__)

_EXACT = 1e-6

WITNESS_SAMPLES = 10_000
"""Original decisions sampled per instance by the condensed suite."""


@dc.dataclass
class SuiteReport:
    name: str
    checked: int = 0
    failures: list[str] = dc.field(default_factory=list[str])
    notes: list[str] = dc.field(default_factory=list[str])

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        logger.warning("%s: %s", self.name, message)
        self.failures.append(message)


def pdft_suite(
    instances: int, seed: int, config: OracleConfig | None = None, max_iter: int = 1000
) -> SuiteReport:
    """PDFT verdicts and delays against the brute-force oracle."""
    config = config or OracleConfig()
    report = SuiteReport("pdft")
    rng = np.random.default_rng(seed)
    for k in range(instances):
        instance = random_atp_instance(rng, config)
        state, facility, partial = instance.state, instance.facility, instance.partial
        result = run_pdft(state, partial, facility, max_iter)
        oracle = oracle_atp(state, partial, facility, config)
        report.checked += 1
        if result.verdict is Verdict.ITERATION_LIMIT:
            report.fail(f"instance {k}: iteration limit of {max_iter} reached")
            continue
        if result.feasible != oracle.feasible:
            report.fail(
                f"instance {k}: pdft says {result.verdict.value}, oracle says "
                f"{'feasible' if oracle.feasible else 'infeasible'}"
            )
            continue
        if result.plan is None:
            continue
        problems = validate_plan(state, result.plan, facility)
        if problems:
            report.fail(f"instance {k}: pdft plan invalid: {'; '.join(problems)}")
            continue
        gap = abs(result.total_delay - oracle.delay)
        if gap <= _EXACT:
            continue
        if gap < config.refine_step:
            report.notes.append(f"instance {k}: delay differs by {gap:.2e}")
        else:
            report.fail(
                f"instance {k}: pdft delay {result.total_delay:.4f}, "
                f"oracle {oracle.delay:.4f}"
            )
    return report


def condensed_suite(
    instances: int,
    seed: int,
    samples: int = WITNESS_SAMPLES,
    config: OracleConfig | None = None,
) -> SuiteReport:
    """No sampled original decision beats the best condensed decision."""
    report = SuiteReport("condensed")
    rng = np.random.default_rng(seed)
    for k in range(instances):
        instance = random_atp_instance(rng, config, max_orders=3)
        witness = condensed_witness(instance.state, instance.facility, rng, samples, config)
        report.checked += 1
        if not witness.holds:
            report.fail(
                f"instance {k}: original decision with delay {witness.challenger:.4f} "
                f"beats condensed optimum {witness.claimed:.4f}"
            )
    return report


def claims_suite(instances: int, seed: int) -> SuiteReport:
    """Sorted preparation and shortest-round-trip-first dispatching are optimal."""
    report = SuiteReport("claims")
    rng = np.random.default_rng(seed)
    for k in range(instances):
        state, facility = sorted_preparation_instance(rng)
        witness = sorted_preparation_witness(state, facility)
        report.checked += 1
        if not witness.holds:
            report.fail(
                f"sorted preparation {k}: {witness.claimed:.4f} > {witness.challenger:.4f}"
            )
        state, facility = spt_departure_instance(rng)
        witness = spt_departure_witness(state, facility)
        report.checked += 1
        if not witness.holds:
            report.fail(f"spt departure {k}: {witness.claimed:.4f} > {witness.challenger:.4f}")
    return report


# =============================================================================
# Gradients
# =============================================================================


def gradient_error(
    network: ValueNetwork,
    features: npt.NDArray[np.float64],
    targets: npt.NDArray[np.float64],
    step: float = 1e-5,
) -> float:
    """Largest elementwise relative error of backprop against central differences."""
    _, analytic = network.gradients(features, targets)
    worst = 0.0
    for param, grad in zip(network.parameters(), analytic, strict=True):
        flat = param.reshape(-1)
        for index in range(flat.size):
            saved = float(flat[index])
            flat[index] = saved + step
            upper, _ = network.gradients(features, targets)
            flat[index] = saved - step
            lower, _ = network.gradients(features, targets)
            flat[index] = saved
            numeric = (upper - lower) / (2 * step)
            exact = float(grad.reshape(-1)[index])
            scale = max(abs(exact) + abs(numeric), 1e-4)
            worst = max(worst, abs(exact - numeric) / scale)
    return worst


def gradient_suite(instances: int, seed: int, tolerance: float = 1e-4) -> SuiteReport:
    report = SuiteReport("gradients")
    rng = np.random.default_rng(seed)
    for k in range(instances):
        network = ValueNetwork.initialize(rng, (21, 8, 8, 1))
        for b in network.biases:
            b += rng.normal(0.0, 0.1, size=b.shape)
        features = rng.normal(size=(8, 21))
        targets = rng.normal(size=8)
        error = gradient_error(network, features, targets)
        report.checked += 1
        if error >= tolerance:
            report.fail(f"network {k}: relative gradient error {error:.2e}")
    return report


# =============================================================================
# Episodes
# =============================================================================


def ledger_suite(days: int, seed: int, scenario_name: str = "desk") -> SuiteReport:
    """Marginal costs add up to realized delay, and nothing arrives stale."""
    report = SuiteReport("ledger")
    scenario = preset(scenario_name)
    facility = build_facility(scenario)
    policies = [Policy.fifo(), Policy.integrated(LnsConfig(iterations=10))]
    for day, orders in enumerate(sample_days(scenario, facility, seed, days)):
        for policy in policies:
            log = run_episode(orders, policy, facility, seed=seed, day=day)
            ledger = realized_delay_ledger(log)
            report.checked += 1
            if not ledger.balanced():
                report.fail(
                    f"day {day} {policy.label}: marginal {ledger.marginal:.6f} "
                    f"!= realized {ledger.realized:.6f}"
                )
            stale = freshness_violations(log, scenario.problem.freshness)
            if stale:
                report.fail(f"day {day} {policy.label}: {stale} stale deliveries")
            if len(log.deliveries) != len(orders):
                report.fail(f"day {day} {policy.label}: not every order was delivered")
    return report


SUITES: Mapping[str, Callable[[int, int], SuiteReport]] = {
    "pdft": pdft_suite,
    "condensed": condensed_suite,
    "claims": claims_suite,
    "gradients": gradient_suite,
    "ledger": ledger_suite,
}

SUITE_ALIASES: Mapping[str, str] = {"theorem1": "condensed"}


def run_suite(
    name: str, instances: int, seed: int, *, samples: int = WITNESS_SAMPLES
) -> SuiteReport:
    """Run the named suite; raises KeyError for an unknown name.

    ``samples`` only applies to the condensed suite.
    """
    name = SUITE_ALIASES.get(name, name)
    if name == "condensed":
        report = condensed_suite(instances, seed, samples)
    else:
        report = SUITES[name](instances, seed)
    logger.info("%s: %d checked, %d failed", name, report.checked, len(report.failures))
    return report

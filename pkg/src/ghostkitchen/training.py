"""Train the value network on simulated days, and fine-tune it on new presets."""

from __future__ import annotations

import csv
import dataclasses as dc
import logging
import math
from collections import deque
from collections.abc import Callable
from pathlib import Path

import numpy as np

from ghostkitchen.config import LnsConfig, Scenario, TrainConfig
from ghostkitchen.instances import build_facility, sample_scenario_day
from ghostkitchen.kpi import compute_kpis
from ghostkitchen.policies import Policy
from ghostkitchen.simulation import EpisodeLog, run_episode
from ghostkitchen.vfa import N_FEATURES, Adam, Checkpoint, ExperienceReplay, ValueNetwork

logger = logging.getLogger(__name__)


def train_step(
    network: ValueNetwork,
    optimizer: Adam,
    replay: ExperienceReplay,
    batch_size: int,
    rng: np.random.Generator,
) -> float | None:
    """One Adam step on a uniform batch; None when the replay is too small.

    Returns the batch loss before the step.
    """
    if len(replay) < batch_size:
        return None
    features, targets = replay.sample(batch_size, rng)
    loss, grads = network.gradients(features, targets)
    optimizer.update(network.parameters(), grads)
    return loss


def add_episode(replay: ExperienceReplay, log: EpisodeLog) -> int:
    """Store each post-decision state with the delay incurred after it."""
    if len(log.features) != len(log.decisions):
        raise ValueError("episode was simulated without recording features")
    for features, target in zip(log.features, log.cost_to_go(), strict=True):
        replay.add(features, target)
    return len(log.features)


@dc.dataclass(frozen=True, slots=True)
class CurvePoint:
    episode: int
    loss: float | None
    mean_delay: float
    replay_size: int


@dc.dataclass
class Trainer:
    """Owns the network, its optimizer and the replay during training."""

    network: ValueNetwork
    config: TrainConfig
    optimizer: Adam = dc.field(init=False)
    replay: ExperienceReplay = dc.field(init=False)

    def __post_init__(self) -> None:
        self.optimizer = Adam(
            self.config.learning_rate,
            self.config.beta1,
            self.config.beta2,
            self.config.adam_eps,
        )
        self.replay = ExperienceReplay(self.config.replay_capacity, N_FEATURES)

    @classmethod
    def fresh(cls, config: TrainConfig, rng: np.random.Generator) -> Trainer:
        sizes = (N_FEATURES, *config.hidden, 1)
        return cls(ValueNetwork.initialize(rng, sizes), config)

    @classmethod
    def resume(cls, checkpoint: Checkpoint, config: TrainConfig) -> Trainer:
        """Continue from a checkpoint, keeping its optimizer moments if saved."""
        trainer = cls(checkpoint.network, config)
        if checkpoint.optimizer is not None:
            trainer.optimizer = dc.replace(
                checkpoint.optimizer,
                learning_rate=config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.adam_eps,
            )
        return trainer

    def observe(self, log: EpisodeLog, rng: np.random.Generator) -> float | None:
        """Ingest one finished day, then update the network."""
        add_episode(self.replay, log)
        loss: float | None = None
        for _ in range(self.config.steps_per_episode):
            step = train_step(
                self.network, self.optimizer, self.replay, self.config.batch_size, rng
            )
            loss = step if step is not None else loss
        return loss


def loss_converged(losses: deque[float], tolerance: float) -> bool:
    """True once a full window improved by less than ``tolerance`` between its halves."""
    if losses.maxlen is None or len(losses) < max(losses.maxlen, 2):
        return False
    half = len(losses) // 2
    values = list(losses)
    older = math.fsum(values[:half]) / half
    newer = math.fsum(values[half:]) / (len(values) - half)
    return older > 0 and (older - newer) / older < tolerance


def train_policy(
    scenario: Scenario,
    trainer: Trainer,
    *,
    episodes: int,
    seed: int,
    lns: LnsConfig | None = None,
    on_point: Callable[[CurvePoint], None] | None = None,
) -> list[CurvePoint]:
    """Simulate ``episodes`` days with the current network, learning after each.

    Decisions always follow the current network; there is no random
    exploration. A fine-tuning run is the same call on a trainer built from
    a loaded checkpoint.
    """
    config = trainer.config
    lns = lns or LnsConfig(iterations=config.lns_iterations)
    facility = build_facility(scenario)
    seeds = np.random.SeedSequence(seed).spawn(2)
    day_rng = np.random.default_rng(seeds[0])
    batch_rng = np.random.default_rng(seeds[1])
    window: deque[float] = deque(maxlen=config.convergence_window)
    curve: list[CurvePoint] = []

    for episode in range(episodes):
        orders = sample_scenario_day(scenario, facility, day_rng)
        policy = Policy.ai(trainer.network, lns, label="ai-train")
        log = run_episode(
            orders, policy, facility, seed=seed, day=episode, record_features=True
        )
        loss = trainer.observe(log, batch_rng)
        point = CurvePoint(
            episode, loss, compute_kpis(log).avg_delay, len(trainer.replay)
        )
        curve.append(point)
        if on_point is not None:
            on_point(point)
        logger.info(
            "episode %d: loss %s, mean delay %.2f, replay %d",
            episode,
            "-" if loss is None else f"{loss:.4f}",
            point.mean_delay,
            point.replay_size,
        )
        if loss is not None:
            window.append(loss)
            if config.stop_on_convergence and loss_converged(window, config.convergence_tol):
                logger.info("loss converged after %d episodes", episode + 1)
                break
    return curve


def write_curve(path: Path, curve: list[CurvePoint]) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["episode", "loss", "mean_delay", "replay_size"])
        for point in curve:
            loss = "" if point.loss is None else f"{point.loss:.6f}"
            writer.writerow([point.episode, loss, f"{point.mean_delay:.6f}", point.replay_size])

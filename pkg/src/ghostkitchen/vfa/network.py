"""Feedforward value network with Adam, in plain numpy."""

from __future__ import annotations

import dataclasses as dc
import itertools
import logging
import typing as ty
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, ValidationError

from ghostkitchen.errors import CheckpointError
from ghostkitchen.vfa.features import FEATURE_NAMES, N_FEATURES

logger = logging.getLogger(__name__)

type Array = npt.NDArray[np.float64]

DEFAULT_SIZES = (N_FEATURES, 256, 256, 1)


@dc.dataclass
class ValueNetwork:
    """Rectified-linear layers and one linear output: predicted cost-to-go.

    ``weights[k]`` has shape (fan_in, fan_out).
    """

    weights: list[Array]
    biases: list[Array]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("one bias per weight matrix required")
        for w, b in zip(self.weights, self.biases, strict=True):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer shapes {w.shape} and {b.shape} disagree")
        for w, following in itertools.pairwise(self.weights):
            if w.shape[1] != following.shape[0]:
                raise ValueError("consecutive layers disagree on width")
        if self.weights[-1].shape[1] != 1:
            raise ValueError("output layer must have one unit")

    @classmethod
    def initialize(
        cls, rng: np.random.Generator, sizes: Sequence[int] = DEFAULT_SIZES
    ) -> ValueNetwork:
        """He-normal weights, zero biases."""
        weights = [
            rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            for fan_in, fan_out in itertools.pairwise(sizes)
        ]
        biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
        return cls(weights, biases)

    @classmethod
    def zeros(cls, sizes: Sequence[int] = DEFAULT_SIZES) -> ValueNetwork:
        return cls(
            [np.zeros((a, b)) for a, b in itertools.pairwise(sizes)],
            [np.zeros(b) for b in sizes[1:]],
        )

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    def parameters(self) -> list[Array]:
        """Weights and biases interleaved, layer by layer."""
        return [p for pair in zip(self.weights, self.biases, strict=True) for p in pair]

    def copy(self) -> ValueNetwork:
        return ValueNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def _batch(self, features: npt.ArrayLike) -> Array:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x[np.newaxis, :]
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ValueError(f"expected {self.sizes[0]} features, got shape {x.shape}")
        return x

    def _activations(self, x: Array) -> tuple[list[Array], list[Array]]:
        inputs = [x]
        pre: list[Array] = []
        a = x
        last = len(self.weights) - 1
        for layer, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            z = a @ w + b
            pre.append(z)
            a = z if layer == last else np.maximum(z, 0.0)
            inputs.append(a)
        return inputs, pre

    def forward(self, features: npt.ArrayLike) -> Array:
        """Predictions for a batch (or one vector) of features."""
        inputs, _ = self._activations(self._batch(features))
        return inputs[-1][:, 0]

    def predict(self, features: npt.ArrayLike) -> float:
        return float(self.forward(features)[0])

    def gradients(self, features: npt.ArrayLike, targets: npt.ArrayLike) -> tuple[float, list[Array]]:
        """Mean squared error and its gradient, ordered like ``parameters()``."""
        x = self._batch(features)
        y = np.asarray(targets, dtype=np.float64).reshape(-1, 1)
        if y.shape[0] != x.shape[0]:
            raise ValueError("one target per feature row required")
        inputs, pre = self._activations(x)
        error = inputs[-1] - y
        loss = float(np.mean(error**2))
        delta = 2.0 * error / x.shape[0]
        grads: list[Array] = []
        for layer in range(len(self.weights) - 1, -1, -1):
            grads.append(delta.sum(axis=0))
            grads.append(inputs[layer].T @ delta)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (pre[layer - 1] > 0.0)
        grads.reverse()
        return loss, grads


# =============================================================================
# Optimizer
# =============================================================================


@dc.dataclass
class Adam:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first: list[Array] = dc.field(default_factory=list[Array])
    second: list[Array] = dc.field(default_factory=list[Array])

    def update(self, params: list[Array], grads: list[Array]) -> None:
        """One in-place step on ``params``."""
        if not self.first:
            self.first = [np.zeros_like(p) for p in params]
            self.second = [np.zeros_like(p) for p in params]
        self.step += 1
        correction1 = 1.0 - self.beta1**self.step
        correction2 = 1.0 - self.beta2**self.step
        for p, g, m, v in zip(params, grads, self.first, self.second, strict=True):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


# =============================================================================
# Checkpoints
# =============================================================================

CHECKPOINT_FORMAT = "ghostkitchen.value-network"


class _CheckpointFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: ty.Literal["ghostkitchen.value-network"] = CHECKPOINT_FORMAT
    version: ty.Literal[1] = 1
    sizes: list[int]
    features: list[str]
    weights: list[list[list[float]]]
    biases: list[list[float]]
    adam_step: int = 0
    adam_first: list[list[float]] = []
    adam_second: list[list[float]] = []
    metadata: dict[str, ty.Any] = {}


@dc.dataclass(frozen=True)
class Checkpoint:
    network: ValueNetwork
    optimizer: Adam | None = None
    metadata: Mapping[str, ty.Any] = dc.field(default_factory=dict[str, ty.Any])


def save_checkpoint(
    path: Path,
    network: ValueNetwork,
    optimizer: Adam | None = None,
    metadata: Mapping[str, ty.Any] | None = None,
) -> None:
    """Write the network, and optionally the optimizer moments, as JSON."""
    data = _CheckpointFile(
        sizes=list(network.sizes),
        features=list(FEATURE_NAMES),
        weights=[w.tolist() for w in network.weights],
        biases=[b.tolist() for b in network.biases],
        metadata=dict(metadata or {}),
    )
    if optimizer is not None and optimizer.first:
        data.adam_step = optimizer.step
        data.adam_first = [m.ravel().tolist() for m in optimizer.first]
        data.adam_second = [v.ravel().tolist() for v in optimizer.second]
    path.write_text(data.model_dump_json() + "\n")
    logger.debug("saved checkpoint %s", path)


def load_checkpoint(path: Path, learning_rate: float | None = None) -> Checkpoint:
    try:
        data = _CheckpointFile.model_validate_json(path.read_text())
    except OSError as exc:
        raise CheckpointError(path, exc.strerror or "unreadable") from exc
    except ValidationError as exc:
        raise CheckpointError(path, f"malformed checkpoint: {exc}") from exc
    if data.features != list(FEATURE_NAMES):
        raise CheckpointError(path, "feature layout differs from this version")
    try:
        network = ValueNetwork(
            [np.asarray(w, dtype=np.float64) for w in data.weights],
            [np.asarray(b, dtype=np.float64) for b in data.biases],
        )
    except ValueError as exc:
        raise CheckpointError(path, str(exc)) from exc
    if list(network.sizes) != data.sizes:
        raise CheckpointError(path, f"declared sizes {data.sizes} do not match weights")

    optimizer: Adam | None = None
    if data.adam_first:
        params = network.parameters()
        if len(data.adam_first) != len(params) or len(data.adam_second) != len(params):
            raise CheckpointError(path, "optimizer moments do not match the network")
        try:
            first = [np.asarray(m).reshape(p.shape) for m, p in zip(data.adam_first, params, strict=True)]
            second = [np.asarray(v).reshape(p.shape) for v, p in zip(data.adam_second, params, strict=True)]
        except ValueError as exc:
            raise CheckpointError(path, "optimizer moments do not match the network") from exc
        optimizer = Adam(step=data.adam_step, first=first, second=second)
        if learning_rate is not None:
            optimizer.learning_rate = learning_rate
    return Checkpoint(network, optimizer, data.metadata)

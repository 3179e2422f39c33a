"""Bounded experience replay of (features, cost-to-go) pairs."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt


class ExperienceReplay:
    """Ring buffer: the oldest experience is evicted once full."""

    def __init__(self, capacity: int, width: int) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.width = width
        self._features: list[npt.NDArray[np.float64]] = []
        self._targets: list[float] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._targets)

    def add(self, features: npt.ArrayLike, target: float) -> None:
        row = np.asarray(features, dtype=np.float64)
        if row.shape != (self.width,):
            raise ValueError(f"expected {self.width} features, got shape {row.shape}")
        if len(self._targets) < self.capacity:
            self._features.append(row)
            self._targets.append(float(target))
        else:
            self._features[self._next] = row
            self._targets[self._next] = float(target)
        self._next = (self._next + 1) % self.capacity

    def extend(self, rows: npt.ArrayLike, targets: npt.ArrayLike) -> None:
        for row, target in zip(
            np.asarray(rows, dtype=np.float64), np.asarray(targets, dtype=np.float64), strict=True
        ):
            self.add(row, float(target))

    def sample(
        self, batch_size: int, rng: np.random.Generator
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Uniform draw without replacement, or the whole buffer when smaller."""
        size = min(batch_size, len(self))
        picks = rng.choice(len(self), size=size, replace=False)
        features = np.stack([self._features[int(k)] for k in picks])
        targets = np.asarray([self._targets[int(k)] for k in picks], dtype=np.float64)
        return features, targets

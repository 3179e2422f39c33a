import json
from pathlib import Path

import numpy as np
import pytest

from ghostkitchen.errors import CheckpointError
from ghostkitchen.validation import gradient_error, gradient_suite
from ghostkitchen.vfa import Adam, ValueNetwork, load_checkpoint, save_checkpoint
from tests.core import Batch

# =============================================================================
# Forward pass
# =============================================================================


def test_zero_network_predicts_zero() -> None:
    """All-zero parameters give zero everywhere."""
    network = ValueNetwork.zeros()
    assert network.predict(np.ones(21)) == 0.0
    assert network.sizes == (21, 256, 256, 1)


def test_hand_computed_forward() -> None:
    """A 1-2-1 network evaluated by hand."""
    network = ValueNetwork(
        [np.array([[1.0, -1.0]]), np.array([[2.0], [3.0]])],
        [np.array([0.0, 1.0]), np.array([0.5])],
    )
    assert network.predict([2.0]) == pytest.approx(4.5)
    assert network.predict([-1.0]) == pytest.approx(6.5)
    assert network.forward([[2.0], [-1.0]]).tolist() == pytest.approx([4.5, 6.5])


def test_shape_checks() -> None:
    """Inconsistent layers and wrong feature widths are rejected."""
    with pytest.raises(ValueError, match="one unit"):
        ValueNetwork([np.zeros((2, 2))], [np.zeros(2)])
    with pytest.raises(ValueError, match="disagree"):
        ValueNetwork([np.zeros((2, 3)), np.zeros((2, 1))], [np.zeros(3), np.zeros(1)])
    with pytest.raises(ValueError, match="expected 21 features"):
        ValueNetwork.zeros().predict(np.ones(5))


# =============================================================================
# Training
# =============================================================================


def test_gradients_match_finite_differences(small_network: ValueNetwork, batch: Batch) -> None:
    """Backpropagation agrees with central differences."""
    for b in small_network.biases:
        b += 0.05
    features, targets = batch
    assert gradient_error(small_network, features, targets) < 1e-4
    report = gradient_suite(2, seed=0)
    assert report.passed, report.failures


def test_zero_learning_rate_changes_nothing(small_network: ValueNetwork, batch: Batch) -> None:
    """Adam with learning rate zero leaves every parameter in place."""
    before = [p.copy() for p in small_network.parameters()]
    _, grads = small_network.gradients(*batch)
    Adam(learning_rate=0.0).update(small_network.parameters(), grads)
    for old, new in zip(before, small_network.parameters(), strict=True):
        assert np.array_equal(old, new)


def test_learns_a_constant(small_network: ValueNetwork, batch: Batch) -> None:
    """Regressing onto a constant drives the loss to zero."""
    features, _ = batch
    targets = np.full(len(features), 3.0)
    optimizer = Adam(learning_rate=1e-2)
    loss = float("inf")
    for _ in range(2000):
        loss, grads = small_network.gradients(features, targets)
        optimizer.update(small_network.parameters(), grads)
    assert loss < 1e-2


# =============================================================================
# Checkpoints
# =============================================================================


def test_checkpoint_round_trip(
    tmp_path: Path, small_network: ValueNetwork, batch: Batch
) -> None:
    """Weights, optimizer moments and metadata survive a save and load."""
    optimizer = Adam(learning_rate=1e-2)
    _, grads = small_network.gradients(*batch)
    optimizer.update(small_network.parameters(), grads)
    path = tmp_path / "network.json"
    save_checkpoint(path, small_network, optimizer, {"episodes": 3})

    loaded = load_checkpoint(path, learning_rate=5e-4)
    for old, new in zip(small_network.parameters(), loaded.network.parameters(), strict=True):
        assert np.allclose(old, new)
    assert loaded.optimizer is not None
    assert loaded.optimizer.step == 1
    assert loaded.optimizer.learning_rate == 5e-4
    for old, new in zip(optimizer.first, loaded.optimizer.first, strict=True):
        assert np.allclose(old, new)
    assert loaded.metadata == {"episodes": 3}


def test_checkpoint_without_optimizer(tmp_path: Path, small_network: ValueNetwork) -> None:
    """A fresh optimizer has no moments to store."""
    path = tmp_path / "network.json"
    save_checkpoint(path, small_network, Adam())
    assert load_checkpoint(path).optimizer is None


def test_missing_checkpoint(tmp_path: Path) -> None:
    """A missing file is a checkpoint error naming the path."""
    path = tmp_path / "absent.json"
    with pytest.raises(CheckpointError) as info:
        load_checkpoint(path)
    assert info.value.path == path


def test_malformed_checkpoint(tmp_path: Path) -> None:
    """Files that are not checkpoints are rejected."""
    path = tmp_path / "network.json"
    path.write_text("{}")
    with pytest.raises(CheckpointError, match="malformed"):
        load_checkpoint(path)


def test_feature_layout_mismatch(tmp_path: Path, small_network: ValueNetwork) -> None:
    """Checkpoints trained on other features are refused."""
    path = tmp_path / "network.json"
    save_checkpoint(path, small_network)
    data = json.loads(path.read_text())
    data["features"] = list(reversed(data["features"]))
    path.write_text(json.dumps(data))
    with pytest.raises(CheckpointError, match="feature layout"):
        load_checkpoint(path)


def test_declared_sizes_mismatch(tmp_path: Path, small_network: ValueNetwork) -> None:
    """Declared sizes must match the stored weights."""
    path = tmp_path / "network.json"
    save_checkpoint(path, small_network)
    data = json.loads(path.read_text())
    data["sizes"] = [21, 9, 1]
    path.write_text(json.dumps(data))
    with pytest.raises(CheckpointError, match="do not match"):
        load_checkpoint(path)

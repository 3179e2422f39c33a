"""Value function approximation: features, network, replay."""

from ghostkitchen.vfa.features import FEATURE_NAMES, N_FEATURES, extract_features
from ghostkitchen.vfa.network import (
    DEFAULT_SIZES,
    Adam,
    Checkpoint,
    ValueNetwork,
    load_checkpoint,
    save_checkpoint,
)
from ghostkitchen.vfa.replay import ExperienceReplay

__all__ = [
    "DEFAULT_SIZES",
    "FEATURE_NAMES",
    "N_FEATURES",
    "Adam",
    "Checkpoint",
    "ExperienceReplay",
    "ValueNetwork",
    "extract_features",
    "load_checkpoint",
    "save_checkpoint",
]

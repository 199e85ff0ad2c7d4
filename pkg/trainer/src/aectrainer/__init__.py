"""Desk-scale trainer for the kfaec mask postfilter network."""

from .data import TrainingData, load_training_data
from .export import export_weights, load_parity
from .loss import kl_loss
from .model import MaskNet
from .train import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "MaskNet",
    "TrainConfig",
    "TrainingData",
    "export_weights",
    "kl_loss",
    "load_parity",
    "load_training_data",
    "train",
]

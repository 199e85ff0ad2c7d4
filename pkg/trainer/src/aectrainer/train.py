"""Training loop: Adam over truncated frame sequences, deterministic per seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .data import TrainingData
from .loss import kl_loss
from .model import MaskNet


@dataclass
class TrainConfig:
    hidden_dim: int = 32
    learning_rate: float = 1e-3
    epochs: int = 20
    sequence_len: int = 128
    eps2: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.eps2 <= 0:
            raise ValueError("eps2 must be > 0")
        if self.sequence_len < 1 or self.epochs < 1:
            raise ValueError("sequence_len and epochs must be >= 1")


def train(config: TrainConfig, data: TrainingData,
          model: MaskNet | None = None):
    """Train a mask network on exported frames; returns (model, loss curve).

    The loss curve holds one mean per-frame loss value per epoch. The
    estimated near-end magnitude is the predicted mask applied to the
    prior-error magnitude, matching what the engine synthesizes.
    """
    torch.manual_seed(config.seed)
    if model is None:
        model = MaskNet(data.input_dim, config.hidden_dim, data.half_bins)
        model.set_normalization(data.mu, data.sigma)
    elif (model.input_dim != data.input_dim
          or model.output_dim != data.half_bins):
        raise ValueError("model dimensions do not match the dataset header")

    features = torch.from_numpy(np.ascontiguousarray(data.features))
    error_mag = torch.from_numpy(np.ascontiguousarray(data.error_mag))
    target_mag = torch.from_numpy(np.ascontiguousarray(data.target_mag))
    n_frames = features.shape[0]
    starts = list(range(0, n_frames, config.sequence_len))

    optimizer = torch.optim.Adam(model.parameters(),
                                 lr=config.learning_rate)
    curve = []
    for _ in range(config.epochs):
        total = 0.0
        for start in starts:
            stop = min(start + config.sequence_len, n_frames)
            optimizer.zero_grad()
            gains, _ = model(features[start:stop])
            est = gains * error_mag[start:stop]
            loss = kl_loss(target_mag[start:stop], est, config.eps2)
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
        curve.append(total / n_frames)
    return model, np.asarray(curve)

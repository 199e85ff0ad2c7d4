"""Reader for the engine's exported training files.

Layout: one JSON header line with {input_dim, half_bins, frames, mu,
sigma}, followed by raw little-endian f32 rows of
[normalized features | prior-error magnitudes | target magnitudes].
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass
class TrainingData:
    mu: np.ndarray
    sigma: np.ndarray
    features: np.ndarray    # (frames, input_dim), already normalized
    error_mag: np.ndarray   # (frames, half_bins)
    target_mag: np.ndarray  # (frames, half_bins)

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    @property
    def half_bins(self) -> int:
        return self.error_mag.shape[1]


def load_training_data(path) -> TrainingData:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        input_dim = int(header["input_dim"])
        half = int(header["half_bins"])
        frames = int(header["frames"])
        row = input_dim + 2 * half
        raw = np.frombuffer(fh.read(), dtype="<f4")
    if raw.size != frames * row:
        raise ValueError("training file size does not match its header")
    data = raw.astype(np.float32).reshape(frames, row)
    return TrainingData(
        mu=np.asarray(header["mu"], dtype=np.float32),
        sigma=np.asarray(header["sigma"], dtype=np.float32),
        features=data[:, :input_dim],
        error_mag=data[:, input_dim:input_dim + half],
        target_mag=data[:, input_dim + half:],
    )

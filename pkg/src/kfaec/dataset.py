"""Training dataset export: oracle-mask engine runs -> per-frame feature/target pairs.

File layout: one JSON header line (dims, normalization stats, frame
count) followed by raw little-endian f32 frames. Each frame stores the
normalized feature vector, the prior-error STFT magnitudes and the
target near-end STFT magnitudes (non-redundant bins).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pipeline import AecPipeline, RunConfig
from .postfilter import feature_log_power
from .scenario import Scenario
from .stft import stft_analyze


@dataclass
class Dataset:
    mu: np.ndarray
    sigma: np.ndarray
    features: np.ndarray   # (frames, 2*(M/2+1)), normalized
    error_mag: np.ndarray  # (frames, M/2+1)
    target_mag: np.ndarray  # (frames, M/2+1)


def collect_frames(config: RunConfig, scenarios: list[Scenario]):
    """Run the engine with an oracle mask and gather raw per-frame data."""
    if config.mask_source != "oracle":
        raise ValueError("training data export requires the oracle mask")
    spec = config.block_spec
    half = spec.dft_len // 2 + 1
    raw_features, error_mag, target_mag = [], [], []
    for scen in scenarios:
        if scen.near_end is None:
            raise ValueError("scenarios must carry ground-truth near-end")
        pipeline = AecPipeline(config)
        n = min(scen.far_end.size, scen.mic.size)
        n -= n % spec.shift
        s_prev = np.zeros(spec.shift)
        for tau in range(n // spec.shift):
            sl = slice(tau * spec.shift, (tau + 1) * spec.shift)
            pipeline.process_block(
                scen.far_end[sl], scen.mic[sl],
                true_near_block=scen.near_end[sl],
                true_interference_block=scen.interference[sl])
            raw_features.append(feature_log_power(
                pipeline.e_prev, pipeline.e_cur,
                pipeline.buffer.partition_block(0), pipeline.window,
                config.eps1))
            e_frame = stft_analyze(pipeline.e_prev, pipeline.e_cur,
                                   pipeline.window)
            s_frame = stft_analyze(s_prev, scen.near_end[sl], pipeline.window)
            s_prev = scen.near_end[sl]
            error_mag.append(np.abs(e_frame[:half]))
            target_mag.append(np.abs(s_frame[:half]))
    return (np.asarray(raw_features), np.asarray(error_mag),
            np.asarray(target_mag))


def export_training_data(path, config: RunConfig,
                         scenarios: list[Scenario]) -> Dataset:
    raw, error_mag, target_mag = collect_frames(config, scenarios)
    mu = np.mean(raw, axis=0)
    sigma = np.std(raw, axis=0)
    sigma = np.where(sigma > 1e-6, sigma, 1.0)
    features = (raw - mu) / sigma
    half = error_mag.shape[1]
    with open(path, "wb") as fh:
        header = {
            "input_dim": int(features.shape[1]),
            "half_bins": int(half),
            "frames": int(features.shape[0]),
            "mu": mu.tolist(),
            "sigma": sigma.tolist(),
        }
        fh.write((json.dumps(header) + "\n").encode())
        frame = np.concatenate([features, error_mag, target_mag], axis=1)
        fh.write(np.ascontiguousarray(frame, dtype="<f4").tobytes())
    return Dataset(mu, sigma, features, error_mag, target_mag)


def load_training_data(path) -> Dataset:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        input_dim = header["input_dim"]
        half = header["half_bins"]
        frames = header["frames"]
        row = input_dim + 2 * half
        data = np.frombuffer(fh.read(), dtype="<f4").astype(float)
    data = data.reshape(frames, row)
    return Dataset(
        mu=np.asarray(header["mu"], dtype=float),
        sigma=np.asarray(header["sigma"], dtype=float),
        features=data[:, :input_dim],
        error_mag=data[:, input_dim:input_dim + half],
        target_mag=data[:, input_dim + half:],
    )

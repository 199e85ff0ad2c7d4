"""Mask providers: feature extraction, recurrent mask network, oracle mask.

The network is dense-tanh -> two GRU layers -> dense-sigmoid over the
non-redundant bins; gains are mirrored conjugate-symmetrically so masked
spectra of real signals stay real after synthesis.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .stft import stft_analyze

WEIGHTS_MAGIC = b"AECW"
WEIGHTS_VERSION = 1
GATE_CONVENTION = 1  # h' = (1-z)*n + z*h, reset gate applied to U_n h


def feature_log_power(e_prev, e_cur, x0_block, window, eps1: float) -> np.ndarray:
    """Unnormalized log power features: prior-error frame then far-end frame.

    Only the non-redundant M/2+1 bins of each spectrum are kept.
    """
    if eps1 <= 0:
        raise ValueError("eps1 must be > 0")
    window = np.asarray(window, dtype=float)
    m = window.size
    half = m // 2 + 1
    e_frame = stft_analyze(e_prev, e_cur, window)
    x0_block = np.asarray(x0_block, dtype=float)
    if x0_block.shape != (m,):
        raise ValueError(f"expected far-end block of length {m}")
    x_frame = np.fft.fft(window * x0_block)
    stacked = np.concatenate([e_frame[:half], x_frame[:half]])
    return np.log(np.maximum(np.abs(stacked) ** 2, eps1))


def compute_features(e_prev, e_cur, x0_block, window, stats, eps1: float) -> np.ndarray:
    """Normalized log-power feature vector of length 2*(M/2+1)."""
    mu, sigma = (np.asarray(s, dtype=float) for s in stats)
    if np.any(sigma <= 0):
        raise ValueError("feature sigma entries must be > 0")
    raw = feature_log_power(e_prev, e_cur, x0_block, window, eps1)
    return (raw - mu) / sigma


@dataclass
class GruLayer:
    w_z: np.ndarray
    w_r: np.ndarray
    w_n: np.ndarray
    u_z: np.ndarray
    u_r: np.ndarray
    u_n: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_n: np.ndarray


@dataclass
class NetworkWeights:
    """Mask network parameters plus the feature normalization statistics."""

    mu: np.ndarray
    sigma: np.ndarray
    w_in: np.ndarray
    b_in: np.ndarray
    gru1: GruLayer
    gru2: GruLayer
    w_out: np.ndarray
    b_out: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.w_in.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_in.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w_out.shape[0]

    def validate(self) -> None:
        p = self.hidden_dim
        if np.any(self.sigma <= 0):
            raise ValueError("sigma entries must be > 0")
        if self.mu.shape != (self.input_dim,) or self.sigma.shape != (self.input_dim,):
            raise ValueError("feature stats must match input_dim")
        for layer in (self.gru1, self.gru2):
            for w in (layer.w_z, layer.w_r, layer.w_n,
                      layer.u_z, layer.u_r, layer.u_n):
                if w.shape != (p, p):
                    raise ValueError("GRU matrices must be hidden x hidden")
            for b in (layer.b_z, layer.b_r, layer.b_n):
                if b.shape != (p,):
                    raise ValueError("GRU biases must be hidden-sized")
        if self.w_out.shape[1] != p or self.b_out.shape != (self.output_dim,):
            raise ValueError("output layer dimensions inconsistent")
        if self.b_in.shape != (p,):
            raise ValueError("input bias must be hidden-sized")


@dataclass
class RecurrentState:
    h1: np.ndarray
    h2: np.ndarray

    @classmethod
    def initial(cls, hidden_dim: int) -> "RecurrentState":
        return cls(np.zeros(hidden_dim), np.zeros(hidden_dim))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gru_step(layer: GruLayer, x, h) -> np.ndarray:
    """One GRU update with the fixed gate convention (see GATE_CONVENTION)."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    z = _sigmoid(layer.w_z @ x + layer.u_z @ h + layer.b_z)
    r = _sigmoid(layer.w_r @ x + layer.u_r @ h + layer.b_r)
    n = np.tanh(layer.w_n @ x + r * (layer.u_n @ h) + layer.b_n)
    return (1.0 - z) * n + z * h


def mirror_gains(half_gains, dft_len: int) -> np.ndarray:
    """Extend M/2+1 gains to all M bins conjugate-symmetrically."""
    half_gains = np.asarray(half_gains, dtype=float)
    if half_gains.shape != (dft_len // 2 + 1,):
        raise ValueError("expected M/2+1 gains")
    return np.concatenate([half_gains, half_gains[-2:0:-1]])


def infer_mask(weights: NetworkWeights, features, state: RecurrentState):
    """Run the mask network for one frame; returns (M gains, new state)."""
    features = np.asarray(features, dtype=float)
    if features.shape != (weights.input_dim,):
        raise ValueError(
            f"expected {weights.input_dim} features, got {features.shape}")
    t = np.tanh(weights.w_in @ features + weights.b_in)
    h1 = gru_step(weights.gru1, t, state.h1)
    h2 = gru_step(weights.gru2, h1, state.h2)
    half = _sigmoid(weights.w_out @ h2 + weights.b_out)
    gains = mirror_gains(half, 2 * (weights.output_dim - 1))
    return gains, RecurrentState(h1, h2)


def oracle_mask(s_frame, e_frame, eps: float = 1e-12) -> np.ndarray:
    """Clipped ideal amplitude mask from the true near-end frame."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    s_mag = np.abs(np.asarray(s_frame))
    e_mag = np.abs(np.asarray(e_frame))
    return np.minimum(s_mag / (e_mag + eps), 1.0)


def apply_mask(mask, spectrum) -> np.ndarray:
    """Element-wise mask application (overlap-save or STFT domain)."""
    mask = np.asarray(mask, dtype=float)
    spectrum = np.asarray(spectrum)
    if mask.shape != spectrum.shape:
        raise ValueError("mask and spectrum must have equal length")
    return mask * spectrum


# --- weights file format (shared with the trainer) ------------------------
#
# little-endian: magic "AECW", u32 version, u32 convention tag, u32 dims
# (input, hidden, output); then f32 arrays in order: mu, sigma, dense-in
# W+b, GRU1 (W_z W_r W_n U_z U_r U_n b_z b_r b_n), GRU2 (same), dense-out
# W+b; matrices row-major with rows = output units.

def _weight_arrays(w: NetworkWeights):
    yield w.mu
    yield w.sigma
    yield w.w_in
    yield w.b_in
    for layer in (w.gru1, w.gru2):
        for a in (layer.w_z, layer.w_r, layer.w_n,
                  layer.u_z, layer.u_r, layer.u_n,
                  layer.b_z, layer.b_r, layer.b_n):
            yield a
    yield w.w_out
    yield w.b_out


def save_weights(weights: NetworkWeights, path) -> None:
    weights.validate()
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<3I", WEIGHTS_VERSION, GATE_CONVENTION,
                             weights.input_dim))
        fh.write(struct.pack("<2I", weights.hidden_dim, weights.output_dim))
        for arr in _weight_arrays(weights):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_weights(path) -> NetworkWeights:
    with open(path, "rb") as fh:
        if fh.read(4) != WEIGHTS_MAGIC:
            raise ValueError("not a mask-network weights file")
        version, convention, input_dim, hidden_dim, output_dim = \
            struct.unpack("<5I", fh.read(20))
        if version != WEIGHTS_VERSION:
            raise ValueError(f"unsupported weights version {version}")
        if convention != GATE_CONVENTION:
            raise ValueError(f"unsupported gate convention {convention}")

        def read(shape):
            n = int(np.prod(shape))
            data = fh.read(4 * n)
            if len(data) != 4 * n:
                raise ValueError("truncated weights file")
            return np.frombuffer(data, dtype="<f4").astype(float).reshape(shape)

        def read_gru():
            p = hidden_dim
            return GruLayer(*(read((p, p)) for _ in range(6)),
                            *(read((p,)) for _ in range(3)))

        weights = NetworkWeights(
            mu=read((input_dim,)),
            sigma=read((input_dim,)),
            w_in=read((hidden_dim, input_dim)),
            b_in=read((hidden_dim,)),
            gru1=read_gru(),
            gru2=read_gru(),
            w_out=read((output_dim, hidden_dim)),
            b_out=read((output_dim,)),
        )
        if fh.read(1):
            raise ValueError("trailing bytes in weights file")
    weights.validate()
    return weights


def random_weights(input_dim: int, hidden_dim: int, output_dim: int,
                   rng, scale: float = 0.2) -> NetworkWeights:
    """Randomly initialized network (testing and training seeds)."""
    def mat(rows, cols):
        return scale * rng.standard_normal((rows, cols))

    def gru():
        p = hidden_dim
        return GruLayer(mat(p, p), mat(p, p), mat(p, p),
                        mat(p, p), mat(p, p), mat(p, p),
                        np.zeros(p), np.zeros(p), np.zeros(p))

    return NetworkWeights(
        mu=np.zeros(input_dim),
        sigma=np.ones(input_dim),
        w_in=mat(hidden_dim, input_dim),
        b_in=np.zeros(hidden_dim),
        gru1=gru(),
        gru2=gru(),
        w_out=mat(output_dim, hidden_dim),
        b_out=np.zeros(output_dim),
    )

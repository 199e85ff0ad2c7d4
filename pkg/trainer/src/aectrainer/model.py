"""Mask network: dense-tanh -> two GRU layers -> dense-sigmoid.

The GRU gates are written out explicitly so the trainer provably matches
the inference engine's fixed gate convention (tag 1):

    z = sigmoid(W_z x + U_z h + b_z)
    r = sigmoid(W_r x + U_r h + b_r)
    n = tanh(W_n x + r * (U_n h) + b_n)
    h' = (1 - z) * n + z * h
"""

from __future__ import annotations

import struct

import numpy as np
import torch
from torch import nn

WEIGHTS_MAGIC = b"AECW"
WEIGHTS_VERSION = 1
GATE_CONVENTION = 1


class GruCell(nn.Module):
    """Single explicit-gate GRU cell over hidden-sized inputs."""

    def __init__(self, hidden_dim: int):
        super().__init__()
        p = hidden_dim
        scale = 1.0 / np.sqrt(p)
        for name in ("w_z", "w_r", "w_n", "u_z", "u_r", "u_n"):
            setattr(self, name,
                    nn.Parameter(scale * torch.randn(p, p)))
        for name in ("b_z", "b_r", "b_n"):
            setattr(self, name, nn.Parameter(torch.zeros(p)))

    def forward(self, x: torch.Tensor, h: torch.Tensor) -> torch.Tensor:
        z = torch.sigmoid(x @ self.w_z.T + h @ self.u_z.T + self.b_z)
        r = torch.sigmoid(x @ self.w_r.T + h @ self.u_r.T + self.b_r)
        n = torch.tanh(x @ self.w_n.T + r * (h @ self.u_n.T) + self.b_n)
        return (1.0 - z) * n + z * h


class MaskNet(nn.Module):
    """Frame-recurrent mask estimator over the non-redundant bins."""

    def __init__(self, input_dim: int, hidden_dim: int, output_dim: int):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.output_dim = output_dim
        scale_in = 1.0 / np.sqrt(input_dim)
        self.w_in = nn.Parameter(scale_in * torch.randn(hidden_dim, input_dim))
        self.b_in = nn.Parameter(torch.zeros(hidden_dim))
        self.gru1 = GruCell(hidden_dim)
        self.gru2 = GruCell(hidden_dim)
        scale_out = 1.0 / np.sqrt(hidden_dim)
        self.w_out = nn.Parameter(scale_out * torch.randn(output_dim,
                                                          hidden_dim))
        self.b_out = nn.Parameter(torch.zeros(output_dim))
        # feature normalization statistics travel with the weights file
        self.register_buffer("mu", torch.zeros(input_dim))
        self.register_buffer("sigma", torch.ones(input_dim))

    def forward(self, features: torch.Tensor,
                state: tuple[torch.Tensor, torch.Tensor] | None = None):
        """Run a (frames, input_dim) sequence; returns (gains, state)."""
        if features.dim() != 2 or features.shape[1] != self.input_dim:
            raise ValueError(
                f"expected (frames, {self.input_dim}) features")
        if state is None:
            h1 = features.new_zeros(self.hidden_dim)
            h2 = features.new_zeros(self.hidden_dim)
        else:
            h1, h2 = state
        gains = []
        for frame in features:
            t = torch.tanh(frame @ self.w_in.T + self.b_in)
            h1 = self.gru1(t, h1)
            h2 = self.gru2(h1, h2)
            gains.append(torch.sigmoid(h2 @ self.w_out.T + self.b_out))
        return torch.stack(gains), (h1, h2)

    def infer(self, features: np.ndarray) -> np.ndarray:
        """Gradient-free forward pass over a numpy feature sequence."""
        with torch.no_grad():
            gains, _ = self.forward(
                torch.as_tensor(np.asarray(features, dtype=np.float32)))
        return gains.numpy()

    # --- binary weights format (shared with the inference engine) ---------
    #
    # little-endian: magic "AECW", u32 version, u32 convention tag, u32
    # input/hidden/output dims; then f32 arrays in order: mu, sigma,
    # dense-in W+b, GRU1 (W_z W_r W_n U_z U_r U_n b_z b_r b_n), GRU2
    # (same), dense-out W+b; matrices row-major with rows = output units.

    def _arrays(self):
        yield self.mu
        yield self.sigma
        yield self.w_in
        yield self.b_in
        for gru in (self.gru1, self.gru2):
            for name in ("w_z", "w_r", "w_n", "u_z", "u_r", "u_n",
                         "b_z", "b_r", "b_n"):
                yield getattr(gru, name)
        yield self.w_out
        yield self.b_out

    def save_weights(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(WEIGHTS_MAGIC)
            fh.write(struct.pack("<5I", WEIGHTS_VERSION, GATE_CONVENTION,
                                 self.input_dim, self.hidden_dim,
                                 self.output_dim))
            for tensor in self._arrays():
                array = tensor.detach().cpu().numpy()
                fh.write(np.ascontiguousarray(array, dtype="<f4").tobytes())

    @classmethod
    def load_weights(cls, path) -> "MaskNet":
        with open(path, "rb") as fh:
            if fh.read(4) != WEIGHTS_MAGIC:
                raise ValueError("not a mask-network weights file")
            version, convention, input_dim, hidden_dim, output_dim = \
                struct.unpack("<5I", fh.read(20))
            if version != WEIGHTS_VERSION:
                raise ValueError(f"unsupported weights version {version}")
            if convention != GATE_CONVENTION:
                raise ValueError(f"unsupported gate convention {convention}")
            model = cls(input_dim, hidden_dim, output_dim)
            with torch.no_grad():
                for tensor in model._arrays():
                    n = tensor.numel()
                    data = fh.read(4 * n)
                    if len(data) != 4 * n:
                        raise ValueError("truncated weights file")
                    values = np.frombuffer(data, dtype="<f4").reshape(
                        tuple(tensor.shape))
                    tensor.copy_(torch.from_numpy(values.copy()))
            if fh.read(1):
                raise ValueError("trailing bytes in weights file")
        return model

    def set_normalization(self, mu, sigma) -> None:
        mu = np.asarray(mu, dtype=np.float32)
        sigma = np.asarray(sigma, dtype=np.float32)
        if np.any(sigma <= 0):
            raise ValueError("sigma entries must be > 0")
        with torch.no_grad():
            self.mu.copy_(torch.from_numpy(mu))
            self.sigma.copy_(torch.from_numpy(sigma))

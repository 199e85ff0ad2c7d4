"""Weights export plus parity vectors for cross-implementation checks.

Parity file layout (little-endian): magic "AECP", u32 frame count, u32
input dim, u32 output dim (non-redundant bins); then f32 feature frames
(count x input) followed by the trainer's forward-pass masks
(count x output), computed sequentially from a zero recurrent state.
"""

from __future__ import annotations

import struct

import numpy as np

from .model import MaskNet

PARITY_MAGIC = b"AECP"
PARITY_FRAMES = 8


def export_weights(model: MaskNet, weights_path, parity_path,
                   seed: int = 0) -> np.ndarray:
    """Write the weights binary and a parity file; returns the masks."""
    model.save_weights(weights_path)
    rng = np.random.default_rng(seed)
    frames = rng.standard_normal(
        (PARITY_FRAMES, model.input_dim)).astype(np.float32)
    masks = model.infer(frames).astype(np.float32)
    with open(parity_path, "wb") as fh:
        fh.write(PARITY_MAGIC)
        fh.write(struct.pack("<3I", PARITY_FRAMES, model.input_dim,
                             model.output_dim))
        fh.write(np.ascontiguousarray(frames, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(masks, dtype="<f4").tobytes())
    return masks


def load_parity(path):
    """Read a parity file; returns (feature frames, mask frames)."""
    with open(path, "rb") as fh:
        if fh.read(4) != PARITY_MAGIC:
            raise ValueError("not a parity file")
        count, input_dim, output_dim = struct.unpack("<3I", fh.read(12))
        frames = np.frombuffer(fh.read(4 * count * input_dim),
                               dtype="<f4").reshape(count, input_dim)
        masks = np.frombuffer(fh.read(4 * count * output_dim),
                              dtype="<f4").reshape(count, output_dim)
        if fh.read(1):
            raise ValueError("trailing bytes in parity file")
    return frames.astype(float), masks.astype(float)

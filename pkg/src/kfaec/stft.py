"""STFT analysis/synthesis at 50% overlap with a constant-overlap-add window pair."""

from __future__ import annotations

import numpy as np


def analysis_window(dft_len: int) -> np.ndarray:
    """Hamming window of length M used for all feature/mask frames."""
    return np.hamming(dft_len)


def cola_synthesis_window(window) -> np.ndarray:
    """Synthesis window paired with `window` for exact COLA at hop M/2."""
    window = np.asarray(window, dtype=float)
    m = window.size
    if m % 2:
        raise ValueError("window length must be even")
    denom = window ** 2 + np.roll(window, m // 2) ** 2
    return window / denom


def stft_analyze(prev_block, cur_block, window) -> np.ndarray:
    """DFT of the windowed concatenation [prev; cur] (one STFT frame)."""
    prev_block = np.asarray(prev_block, dtype=float)
    cur_block = np.asarray(cur_block, dtype=float)
    window = np.asarray(window, dtype=float)
    r = window.size // 2
    if prev_block.shape != (r,) or cur_block.shape != (r,):
        raise ValueError(f"expected two blocks of length {r}")
    return np.fft.fft(window * np.concatenate([prev_block, cur_block]))


class OverlapAddSynthesizer:
    """Streaming inverse STFT; each pushed frame yields R output samples.

    The R samples emitted for frame tau reconstruct the signal region of
    block tau-1 (one-block latency inherent to 50% overlap-add).
    """

    def __init__(self, synthesis_window):
        self.window = np.asarray(synthesis_window, dtype=float)
        if self.window.size % 2:
            raise ValueError("window length must be even")
        self.shift = self.window.size // 2
        self.buffer = np.zeros(self.window.size)

    def push(self, frame) -> np.ndarray:
        frame = np.asarray(frame)
        if frame.shape != (self.window.size,):
            raise ValueError(f"expected frame of length {self.window.size}")
        self.buffer += np.fft.ifft(frame).real * self.window
        out = self.buffer[:self.shift].copy()
        self.buffer = np.concatenate(
            [self.buffer[self.shift:], np.zeros(self.shift)])
        return out


def stft_synthesize(frames, synthesis_window) -> np.ndarray:
    """Overlap-add a frame sequence; output block k reconstructs input block k-1."""
    ola = OverlapAddSynthesizer(synthesis_window)
    chunks = [ola.push(f) for f in frames]
    if not chunks:
        return np.zeros(0)
    return np.concatenate(chunks)


def replay_masks(signal, masks, window, synthesis_window) -> np.ndarray:
    """Apply a recorded per-block mask sequence to a time signal offline.

    Frames follow the streaming convention (frame tau spans blocks tau-1
    and tau); the output is re-aligned with the input signal.
    """
    signal = np.asarray(signal, dtype=float)
    masks = np.asarray(masks, dtype=float)
    m = window.size
    r = m // 2
    n_blocks = masks.shape[0]
    if signal.size < n_blocks * r:
        raise ValueError("signal shorter than the recorded mask sequence")
    blocks = signal[:n_blocks * r].reshape(n_blocks, r)
    out = np.zeros(n_blocks * r)
    prev = np.zeros(r)
    acc = np.zeros(m)
    for tau in range(n_blocks):
        frame = masks[tau] * stft_analyze(prev, blocks[tau], window)
        acc += np.fft.ifft(frame).real * np.asarray(synthesis_window)
        # frame tau sits at offset (tau-1)*r; emit the completed block
        if tau >= 1:
            out[(tau - 1) * r:tau * r] = acc[:r]
        acc = np.concatenate([acc[r:], np.zeros(r)])
        prev = blocks[tau]
    # last block: only partially covered, emit what the buffer holds
    out[(n_blocks - 1) * r:] = acc[:r]
    return out

"""Kullback-Leibler style training objective on STFT magnitudes.

Per bin and frame: -|s| * log(|s_hat| + eps2) + |s_hat|, summed; the
target-only constant terms of the full divergence are omitted because
they do not affect the gradient.
"""

from __future__ import annotations

import torch


def kl_loss(target_mag: torch.Tensor, est_mag: torch.Tensor,
            eps2: float = 1e-12) -> torch.Tensor:
    if eps2 <= 0:
        raise ValueError("eps2 must be > 0")
    if target_mag.shape != est_mag.shape:
        raise ValueError("target and estimate must have equal shape")
    return torch.sum(-target_mag * torch.log(est_mag + eps2) + est_mag)

"""Observation- and process-noise PSD estimation from the masked prior error.

The prior error is split by the postfilter mask into a near-end part
(tracked instantaneously) and a slowly varying noise-floor part (tracked
by a minimum-statistics estimator); their sum regularizes the Kalman
step size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _masked_power(mask, prior_error) -> np.ndarray:
    mask = np.asarray(mask, dtype=float)
    prior_error = np.asarray(prior_error)
    if mask.shape != prior_error.shape:
        raise ValueError("mask and prior error must have equal length")
    if np.any(mask < 0) or np.any(mask > 1):
        raise ValueError("mask entries must lie in [0, 1]")
    return np.abs(mask * prior_error) ** 2


@dataclass
class NearEndPsdState:
    """Recursively averaged periodogram of the masked prior error."""

    psi: np.ndarray
    smoothing: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError("smoothing factor must lie in [0, 1)")
        if np.any(self.psi < 0):
            raise ValueError("PSD entries must be >= 0")

    @classmethod
    def initial(cls, dft_len: int, smoothing: float = 0.0) -> "NearEndPsdState":
        return cls(np.zeros(dft_len), smoothing)


def update_near_end_psd(state: NearEndPsdState, mask, prior_error) -> NearEndPsdState:
    power = _masked_power(mask, prior_error)
    psi = state.smoothing * state.psi + (1.0 - state.smoothing) * power
    return NearEndPsdState(psi, state.smoothing)


@dataclass
class MinStatState:
    """Minimum-statistics noise floor: min of the last kappa smoothed periodograms."""

    smoothed: np.ndarray
    window: list = field(default_factory=list)
    smoothing: float = 0.9
    kappa: int = 90
    primed: bool = False

    def __post_init__(self):
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError("smoothing factor must lie in [0, 1)")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")

    @classmethod
    def initial(cls, dft_len: int, smoothing: float = 0.9,
                kappa: int = 90) -> "MinStatState":
        return cls(np.zeros(dft_len), [], smoothing, kappa)


def update_noise_floor(state: MinStatState, mask, prior_error):
    """Smooth the mask-complement periodogram and take the windowed minimum."""
    power = _masked_power(1.0 - np.asarray(mask, dtype=float), prior_error)
    if state.primed:
        smoothed = state.smoothing * state.smoothed \
            + (1.0 - state.smoothing) * power
    else:
        # cold start: seed with the first periodogram so the floor does
        # not lock to zero
        smoothed = power
    window = state.window[-(state.kappa - 1):] + [smoothed] \
        if state.kappa > 1 else [smoothed]
    psi_floor = np.min(np.stack(window), axis=0)
    new_state = MinStatState(smoothed, window, state.smoothing,
                             state.kappa, primed=True)
    return new_state, psi_floor


def observation_noise_psd(psi_near, psi_floor) -> np.ndarray:
    """Combined observation noise PSD: near-end plus noise floor."""
    psi_near = np.asarray(psi_near, dtype=float)
    psi_floor = np.asarray(psi_floor, dtype=float)
    if np.any(psi_near < 0) or np.any(psi_floor < 0):
        raise ValueError("PSD entries must be >= 0")
    return psi_near + psi_floor


@dataclass
class ProcessNoiseState:
    """Recursive per-partition filter power for process-noise estimation."""

    psi_w: np.ndarray
    smoothing: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError("smoothing factor must lie in [0, 1)")

    @classmethod
    def initial(cls, partitions: int, dft_len: int,
                smoothing: float = 0.9) -> "ProcessNoiseState":
        return cls(np.zeros((partitions, dft_len)), smoothing)


def update_process_noise(state: ProcessNoiseState, w_hat_prev, transition: float):
    """Track |w_hat|^2 recursively and scale by (1 - A^2)."""
    if not 0.0 < transition < 1.0:
        raise ValueError("transition coefficient must lie in (0, 1)")
    power = np.abs(np.asarray(w_hat_prev)) ** 2
    psi_w = state.smoothing * state.psi_w + (1.0 - state.smoothing) * power
    psi_dw = (1.0 - transition ** 2) * psi_w
    return ProcessNoiseState(psi_w, state.smoothing), psi_dw


def baseline_observation_noise(psi, prior_error, alpha: float = 0.5) -> np.ndarray:
    """Baseline estimator: recursive averaging of the raw prior error power."""
    psi = np.asarray(psi, dtype=float)
    power = np.abs(np.asarray(prior_error)) ** 2
    return alpha * psi + (1.0 - alpha) * power

"""Diagonalized partitioned-block Kalman filter for the early-echo FIR partitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import (
    BlockSpec,
    FarEndBuffer,
    apply_gradient_constraint,
    pbc_early_echo,
)

DEFAULT_EPS_REG = 1e-10


@dataclass
class KalmanState:
    """Per-partition filter means and diagonal state uncertainties.

    w_hat: (B, M) complex filter partition spectra
    p_diag: (B, M) nonnegative state uncertainty diagonals
    transition: state transition coefficient A in (0, 1)
    """

    w_hat: np.ndarray
    p_diag: np.ndarray
    transition: float

    def __post_init__(self):
        if not 0.0 < self.transition < 1.0:
            raise ValueError("transition coefficient must lie in (0, 1)")
        if not np.all(np.isfinite(self.w_hat)):
            raise ValueError("filter means must be finite")
        if np.any(self.p_diag < 0) or not np.all(np.isfinite(self.p_diag)):
            raise ValueError("state uncertainties must be finite and >= 0")

    @classmethod
    def initial(cls, spec: BlockSpec, transition: float = 0.999,
                uncertainty: float = 1.0) -> "KalmanState":
        return cls(
            w_hat=np.zeros((spec.partitions, spec.dft_len), dtype=complex),
            p_diag=np.full((spec.partitions, spec.dft_len), float(uncertainty)),
            transition=transition,
        )


@dataclass
class StepSize:
    """Diagonals of the adaptive per-partition step size matrices, (B, M)."""

    lambda_diag: np.ndarray

    def __post_init__(self):
        if np.any(self.lambda_diag < 0) or not np.all(np.isfinite(self.lambda_diag)):
            raise ValueError("step sizes must be finite and >= 0")


@dataclass
class Prediction:
    d_hat_spectrum: np.ndarray
    d_hat_block: np.ndarray
    error_spectrum: np.ndarray
    error_block: np.ndarray
    p_plus: np.ndarray


def predict_and_error(state: KalmanState, buffer: FarEndBuffer,
                      mic_spectrum, process_noise) -> Prediction:
    """Early-echo prediction, prior error and predicted state uncertainty.

    The echo prediction uses a transition factor of one; the A scaling
    enters only the uncertainty prediction p_plus = A^2 p + psi_dW.
    """
    d_block, d_spectrum = pbc_early_echo(state.w_hat, buffer)
    mic_spectrum = np.asarray(mic_spectrum)
    e_spectrum = mic_spectrum - d_spectrum
    e_block = np.fft.ifft(e_spectrum).real[buffer.spec.shift:]
    p_plus = state.transition ** 2 * state.p_diag + np.asarray(process_noise)
    if not (np.all(np.isfinite(e_spectrum)) and np.all(np.isfinite(p_plus))):
        raise ArithmeticError("non-finite values in Kalman prediction")
    return Prediction(d_spectrum, d_block, e_spectrum, e_block, p_plus)


def compute_step_size(p_plus, buffer: FarEndBuffer, psi_obs, spec: BlockSpec,
                      eps_reg: float = DEFAULT_EPS_REG) -> StepSize:
    """Per-bin adaptive step size: p_plus over summed far-end power plus noise."""
    psi_obs = np.asarray(psi_obs, dtype=float)
    if np.any(psi_obs < 0):
        raise ValueError("observation noise PSD must be >= 0")
    p_plus = np.asarray(p_plus, dtype=float)
    far_power = np.abs(buffer.spectra) ** 2
    denom = (np.sum(far_power * p_plus, axis=0)
             + (spec.dft_len / spec.shift) * psi_obs + eps_reg)
    return StepSize(p_plus / denom)


def update(state: KalmanState, step: StepSize, buffer: FarEndBuffer,
           prior_error, p_plus, spec: BlockSpec) -> KalmanState:
    """Constrained filter update and state uncertainty shrinkage."""
    prior_error = np.asarray(prior_error)
    grad = step.lambda_diag * np.conj(buffer.spectra) * prior_error
    w_new = state.w_hat + apply_gradient_constraint(grad)
    shrink = 1.0 - (spec.shift / spec.dft_len) * step.lambda_diag \
        * np.abs(buffer.spectra) ** 2
    p_new = np.maximum(shrink * np.asarray(p_plus), 0.0)
    if not np.all(np.isfinite(w_new)):
        raise ArithmeticError("non-finite filter coefficients after update")
    return KalmanState(w_hat=w_new, p_diag=p_new, transition=state.transition)

"""Echo-suppression and near-end-distortion metrics plus runtime accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .stft import replay_masks

DB_CAP = 80.0
POWER_FLOOR = 1e-12


def db_ratio(numerator: float, denominator: float) -> float:
    """10*log10 of a power ratio, floored at 1e-12 and capped at +-80 dB."""
    value = 10.0 * np.log10(max(numerator, POWER_FLOOR)
                            / max(denominator, POWER_FLOOR))
    return float(np.clip(value, -DB_CAP, DB_CAP))


def erle_time_dependent(echo_blocks, echo_hat_blocks,
                        smoothing: float = 0.99) -> np.ndarray:
    """Per-block ERLE in dB with recursively averaged powers."""
    echo_blocks = np.asarray(echo_blocks, dtype=float)
    echo_hat_blocks = np.asarray(echo_hat_blocks, dtype=float)
    if echo_blocks.shape != echo_hat_blocks.shape:
        raise ValueError("block streams must have equal shape")
    if not 0.0 <= smoothing < 1.0:
        raise ValueError("smoothing must lie in [0, 1)")
    num = den = 0.0
    series = np.zeros(echo_blocks.shape[0])
    for tau in range(echo_blocks.shape[0]):
        d_pow = float(np.sum(echo_blocks[tau] ** 2))
        r_pow = float(np.sum((echo_blocks[tau] - echo_hat_blocks[tau]) ** 2))
        if smoothing == 0.0:
            num, den = d_pow, r_pow
        else:
            num = smoothing * num + (1.0 - smoothing) * d_pow
            den = smoothing * den + (1.0 - smoothing) * r_pow
        series[tau] = db_ratio(num, den)
    return series


def erle_average(echo, echo_hat) -> float:
    """Signal-averaged ERLE in dB."""
    echo = np.asarray(echo, dtype=float)
    echo_hat = np.asarray(echo_hat, dtype=float)
    if echo.shape != echo_hat.shape:
        raise ValueError("signals must have equal length")
    echo_power = float(np.sum(echo ** 2))
    if echo_power <= 0:
        raise ValueError("ERLE undefined for a silent echo")
    return db_ratio(echo_power, float(np.sum((echo - echo_hat) ** 2)))


def erle_after_pf(echo, echo_hat, masks, window, synthesis_window) -> float:
    """ERLE after replaying the recorded masks on the residual echo stream."""
    masks = np.asarray(masks, dtype=float)
    if masks.size == 0:
        raise ValueError("no recorded masks to replay")
    residual = np.asarray(echo, dtype=float) - np.asarray(echo_hat, dtype=float)
    filtered = replay_masks(residual, masks, window, synthesis_window)
    echo_power = float(np.sum(np.asarray(echo, dtype=float) ** 2))
    if echo_power <= 0:
        raise ValueError("ERLE undefined for a silent echo")
    return db_ratio(echo_power, float(np.sum(filtered ** 2)))


def near_end_distortion(near_end, masks, window, synthesis_window):
    """Distortion the recorded masks inflict on the isolated near-end.

    Returns (s_pf dB, beta, degenerate flag); beta absorbs pure scaling.
    """
    near_end = np.asarray(near_end, dtype=float)
    s_power = float(np.sum(near_end ** 2))
    if s_power <= 0:
        raise ValueError("near-end distortion undefined for a silent near-end")
    masks = np.asarray(masks, dtype=float)
    filtered = replay_masks(near_end, masks, window, synthesis_window)
    n = filtered.size
    beta = float(np.dot(near_end[:n], filtered) / np.sum(near_end[:n] ** 2))
    if abs(beta) < 1e-12:
        return 0.0, beta, True
    scaled = beta * near_end[:n]
    s_pf = db_ratio(float(np.sum(scaled ** 2)),
                    float(np.sum((scaled - filtered) ** 2)))
    return s_pf, beta, False


def runtime_stats(block_timings, shift: int, sample_rate: int):
    """Mean per-block wall time (ms) and the real-time factor."""
    block_timings = np.asarray(block_timings, dtype=float)
    if block_timings.size == 0:
        raise ValueError("no block timings recorded")
    mean_s = float(np.mean(block_timings))
    return mean_s * 1e3, mean_s / (shift / sample_rate)


@dataclass
class MetricsReport:
    erle_series: np.ndarray
    erle_avg: float
    erle_pf: float | None = None
    s_pf: float | None = None
    beta: float | None = None
    s_pf_degenerate: bool = False
    block_time_ms: float = 0.0
    rtf: float = 0.0
    pesq_delta: float | None = None  # external hook, None when unavailable

    def summary(self) -> dict:
        return {
            "erle_avg_db": self.erle_avg,
            "erle_pf_db": self.erle_pf,
            "s_pf_db": self.s_pf,
            "beta": self.beta,
            "s_pf_degenerate": self.s_pf_degenerate,
            "block_time_ms": self.block_time_ms,
            "rtf": self.rtf,
            "pesq_delta": self.pesq_delta,
        }

"""Per-block orchestration: prior error -> mask -> PSD updates -> Kalman update -> synthesis."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kalman, psd
from .blocks import BlockSpec, FarEndBuffer, spectrum_from_block
from .metrics import (
    MetricsReport,
    erle_after_pf,
    erle_average,
    erle_time_dependent,
    near_end_distortion,
    runtime_stats,
)
from .postfilter import (
    NetworkWeights,
    RecurrentState,
    apply_mask,
    compute_features,
    infer_mask,
    load_weights,
    oracle_mask,
)
from .scenario import Scenario
from .stft import (
    OverlapAddSynthesizer,
    analysis_window,
    cola_synthesis_window,
    stft_analyze,
)

ESTIMATORS = ("proposed", "baseline", "oracle")
MASK_SOURCES = ("unity", "oracle", "network")


@dataclass
class RunConfig:
    shift: int = 256
    partitions: int = 8
    transition: float = 0.999
    lambda_s: float = 0.0
    lambda_p: float = 0.9
    lambda_w: float = 0.9
    kappa: int = 90
    eps1: float = 1e-12
    eps_reg: float = 1e-10
    estimator: str = "proposed"
    baseline_alpha: float = 0.5
    mask_source: str = "unity"
    weights_path: str | None = None
    sample_rate: int = 16000
    oracle_mask_eps: float = 1e-12
    erle_smoothing: float = 0.99

    def __post_init__(self):
        for name in ("lambda_s", "lambda_p", "lambda_w", "baseline_alpha"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if self.mask_source not in MASK_SOURCES:
            raise ValueError(f"mask_source must be one of {MASK_SOURCES}")
        if self.mask_source == "network" and not self.weights_path:
            raise ValueError("mask_source 'network' requires weights_path")

    @property
    def block_spec(self) -> BlockSpec:
        return BlockSpec.create(self.shift, self.partitions)


class UnityMaskProvider:
    def mask_for(self, pipeline, e_frame, true_near_block):
        return np.ones(e_frame.size)


class OracleMaskProvider:
    """Clipped ideal amplitude mask from the true near-end blocks."""

    def __init__(self, shift: int, eps: float):
        self.eps = eps
        self.s_prev = np.zeros(shift)

    def mask_for(self, pipeline, e_frame, true_near_block):
        if true_near_block is None:
            raise ValueError("oracle mask requires the true near-end blocks")
        s_frame = stft_analyze(self.s_prev, true_near_block, pipeline.window)
        self.s_prev = np.asarray(true_near_block, dtype=float)
        return oracle_mask(s_frame, e_frame, self.eps)


class NetworkMaskProvider:
    """Recurrent mask network fed with prior-error and far-end features."""

    def __init__(self, weights: NetworkWeights, eps1: float):
        self.weights = weights
        self.eps1 = eps1
        self.state = RecurrentState.initial(weights.hidden_dim)

    def mask_for(self, pipeline, e_frame, true_near_block):
        features = compute_features(
            pipeline.e_prev, pipeline.e_cur,
            pipeline.buffer.partition_block(0), pipeline.window,
            (self.weights.mu, self.weights.sigma), self.eps1)
        gains, self.state = infer_mask(self.weights, features, self.state)
        return gains


def make_mask_provider(config: RunConfig):
    if config.mask_source == "unity":
        return UnityMaskProvider()
    if config.mask_source == "oracle":
        return OracleMaskProvider(config.shift, config.oracle_mask_eps)
    return NetworkMaskProvider(load_weights(config.weights_path), config.eps1)


@dataclass
class BlockRecord:
    index: int
    error_power: float
    mask_mean: float
    psi_s_mean: float
    psi_p_mean: float
    psi_i_mean: float
    elapsed_s: float


class AecPipeline:
    """Single-stream echo canceller; owns all per-stream state."""

    def __init__(self, config: RunConfig, mask_provider=None):
        self.config = config
        self.spec = config.block_spec
        self.window = analysis_window(self.spec.dft_len)
        self.synthesis_window = cola_synthesis_window(self.window)
        self.buffer = FarEndBuffer(self.spec)
        self.state = kalman.KalmanState.initial(self.spec, config.transition)
        self.near_psd = psd.NearEndPsdState.initial(
            self.spec.dft_len, config.lambda_s)
        self.floor_psd = psd.MinStatState.initial(
            self.spec.dft_len, config.lambda_p, config.kappa)
        self.process_psd = psd.ProcessNoiseState.initial(
            self.spec.partitions, self.spec.dft_len, config.lambda_w)
        self.baseline_psi = None
        self.oracle_psi = None
        self.mask_provider = mask_provider or make_mask_provider(config)
        self.ola = OverlapAddSynthesizer(self.synthesis_window)
        self.e_prev = np.zeros(self.spec.shift)
        self.e_cur = np.zeros(self.spec.shift)
        self.block_index = 0

    def _observation_noise(self, mask, e_spec, true_interference_block):
        cfg = self.config
        if cfg.estimator == "baseline":
            if self.baseline_psi is None:
                self.baseline_psi = np.abs(e_spec) ** 2
            else:
                self.baseline_psi = psd.baseline_observation_noise(
                    self.baseline_psi, e_spec, cfg.baseline_alpha)
            return self.baseline_psi
        if cfg.estimator == "oracle":
            if true_interference_block is None:
                raise ValueError(
                    "oracle estimator requires the true interference blocks")
            power = np.abs(
                spectrum_from_block(true_interference_block, self.spec)) ** 2
            if self.oracle_psi is None:
                self.oracle_psi = power
            else:
                self.oracle_psi = 0.9 * self.oracle_psi + 0.1 * power
            return self.oracle_psi
        self.near_psd = psd.update_near_end_psd(self.near_psd, mask, e_spec)
        self.floor_psd, psi_floor = psd.update_noise_floor(
            self.floor_psd, mask, e_spec)
        return psd.observation_noise_psd(self.near_psd.psi, psi_floor)

    def process_block(self, far_block, mic_block,
                      true_near_block=None, true_interference_block=None):
        """Run one block; returns (s_hat block, d_hat block, mask, record)."""
        start = time.perf_counter()
        cfg = self.config
        self.buffer.advance(far_block)
        mic_block = np.asarray(mic_block, dtype=float)
        y_spec = spectrum_from_block(mic_block, self.spec)

        # process noise from the previous filter estimate
        self.process_psd, psi_dw = psd.update_process_noise(
            self.process_psd, self.state.w_hat, cfg.transition)

        pred = kalman.predict_and_error(self.state, self.buffer, y_spec, psi_dw)
        self.e_prev, self.e_cur = self.e_cur, pred.error_block
        e_frame = stft_analyze(self.e_prev, self.e_cur, self.window)

        mask = self.mask_provider.mask_for(self, e_frame, true_near_block)
        psi_obs = self._observation_noise(mask, pred.error_spectrum,
                                          true_interference_block)

        step = kalman.compute_step_size(pred.p_plus, self.buffer, psi_obs,
                                        self.spec, cfg.eps_reg)
        self.state = kalman.update(self.state, step, self.buffer,
                                   pred.error_spectrum, pred.p_plus, self.spec)

        s_hat_block = self.ola.push(apply_mask(mask, e_frame))

        record = BlockRecord(
            index=self.block_index,
            error_power=float(np.sum(pred.error_block ** 2)),
            mask_mean=float(np.mean(mask)),
            psi_s_mean=float(np.mean(self.near_psd.psi)),
            psi_p_mean=float(np.mean(self.floor_psd.smoothed)),
            psi_i_mean=float(np.mean(psi_obs)),
            elapsed_s=time.perf_counter() - start,
        )
        self.block_index += 1
        return s_hat_block, pred.d_hat_block, mask, record


@dataclass
class StreamResult:
    s_hat: np.ndarray
    d_hat: np.ndarray
    masks: np.ndarray
    records: list
    metrics: MetricsReport | None


def process_stream(config: RunConfig, far_end, mic,
                   scenario: Scenario | None = None) -> StreamResult:
    """Process a full signal pair block by block; metrics need a scenario."""
    far_end = np.asarray(far_end, dtype=float)
    mic = np.asarray(mic, dtype=float)
    n = min(far_end.size, mic.size)
    r = config.shift
    n -= n % r
    if n == 0:
        raise ValueError("input signals shorter than one block")
    pipeline = AecPipeline(config)

    s_hat = np.zeros(n)
    d_hat = np.zeros(n)
    masks = np.zeros((n // r, config.block_spec.dft_len))
    records = []
    near = scenario.near_end if scenario is not None else None
    interference = scenario.interference if scenario is not None else None
    for tau in range(n // r):
        sl = slice(tau * r, (tau + 1) * r)
        s_block, d_block, mask, record = pipeline.process_block(
            far_end[sl], mic[sl],
            true_near_block=None if near is None else near[sl],
            true_interference_block=None
            if interference is None else interference[sl])
        s_hat[sl] = s_block
        d_hat[sl] = d_block
        masks[tau] = mask
        records.append(record)

    metrics = None
    if scenario is not None:
        metrics = compute_metrics(config, scenario, d_hat, masks, records)
    return StreamResult(s_hat, d_hat, masks, records, metrics)


def compute_metrics(config: RunConfig, scenario: Scenario, d_hat, masks,
                    records) -> MetricsReport:
    spec = config.block_spec
    window = analysis_window(spec.dft_len)
    synthesis = cola_synthesis_window(window)
    n = d_hat.size
    echo = scenario.echo_full[:n]
    echo_blocks = echo.reshape(-1, spec.shift)
    d_hat_blocks = d_hat.reshape(-1, spec.shift)
    series = erle_time_dependent(echo_blocks, d_hat_blocks,
                                 config.erle_smoothing)
    report = MetricsReport(
        erle_series=series,
        erle_avg=erle_average(echo, d_hat),
        erle_pf=erle_after_pf(echo, d_hat, masks, window, synthesis),
    )
    near = scenario.near_end[:n]
    if np.sum(near ** 2) > 0:
        report.s_pf, report.beta, report.s_pf_degenerate = \
            near_end_distortion(near, masks, window, synthesis)
    timings = [rec.elapsed_s for rec in records]
    report.block_time_ms, report.rtf = runtime_stats(
        timings, config.shift, config.sample_rate)
    return report

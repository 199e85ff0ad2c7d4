"""Synthetic test scenarios: RIR generation, echo rendering, mixing, WAV I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.io import wavfile
from scipy.signal import fftconvolve


@dataclass(frozen=True)
class ScenarioConfig:
    sample_rate: int = 16000
    duration: float = 10.0
    ner_db: float = 0.0
    enr_db: float = 30.0
    rir_len: int = 2048
    rir_t60: float = 0.2
    epc_times: tuple = ()
    seed: int = 0
    filter_len: int = 2048       # early/late split point L
    block_shift: int = 256       # EPC boundaries snap to this grid
    near_end_silent: bool = False

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")
        if self.rir_len < self.filter_len:
            raise ValueError("rir_len must be >= filter_len")
        times = list(self.epc_times)
        if times != sorted(times) or len(set(times)) != len(times):
            raise ValueError("epc_times must be strictly increasing")
        if times and (times[0] <= 0 or times[-1] >= self.duration):
            raise ValueError("epc_times must lie strictly inside the duration")


@dataclass
class Scenario:
    """Ground-truth signal bundle; mic == early + late + near_end + noise."""

    config: ScenarioConfig
    far_end: np.ndarray
    near_end: np.ndarray
    noise: np.ndarray
    echo_early: np.ndarray
    echo_late: np.ndarray
    mic: np.ndarray
    rir_segments: list = field(default_factory=list)  # (start_sample, rir)

    @property
    def echo_full(self) -> np.ndarray:
        return self.echo_early + self.echo_late

    @property
    def interference(self) -> np.ndarray:
        """Everything the adaptive filter cannot model: late echo + noise + near-end."""
        return self.echo_late + self.noise + self.near_end


def generate_rir(t60: float, length: int, sample_rate: int, seed) -> np.ndarray:
    """Exponentially decaying white-noise RIR, peak-normalized."""
    if t60 <= 0:
        raise ValueError("t60 must be > 0")
    rng = np.random.default_rng(seed)
    t = np.arange(length) / sample_rate
    envelope = np.exp(-3.0 * np.log(10.0) * t / t60)
    rir = rng.standard_normal(length) * envelope
    return rir / np.max(np.abs(rir))


def render_echo(far_end, rir, split_at: int):
    """Convolve with the RIR, split into early (first L taps) and late parts."""
    far_end = np.asarray(far_end, dtype=float)
    rir = np.asarray(rir, dtype=float)
    if rir.size < split_at:
        raise ValueError("RIR shorter than the requested split point")
    n = far_end.size
    early = fftconvolve(far_end, rir[:split_at])[:n]
    if rir.size > split_at:
        tail = fftconvolve(far_end, rir[split_at:])
        late = np.concatenate([np.zeros(split_at), tail])[:n]
    else:
        late = np.zeros(n)
    return early, late


def speech_like(n_samples: int, sample_rate: int, rng) -> np.ndarray:
    """Deterministic speech surrogate: 1/f-shaped noise gated into bursts.

    Bursts and pauses alternate so both single-talk and double-talk occur
    when two independent surrogates are mixed.
    """
    white = rng.standard_normal(n_samples)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / sample_rate)
    shaping = np.ones_like(freqs)
    positive = freqs > 0
    shaping[positive] = 1.0 / np.sqrt(np.maximum(freqs[positive], 80.0) / 80.0)
    signal = np.fft.irfft(spectrum * shaping, n=n_samples)

    envelope = np.zeros(n_samples)
    ramp_len = max(int(0.02 * sample_rate), 1)
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(ramp_len) / ramp_len))
    pos = 0
    while pos < n_samples:
        burst = int(rng.uniform(0.25, 0.9) * sample_rate)
        amp = rng.uniform(0.4, 1.0)
        seg = np.full(min(burst, n_samples - pos), amp)
        m = min(ramp_len, seg.size)
        seg[:m] *= ramp[:m]
        seg[-m:] *= ramp[:m][::-1]
        envelope[pos:pos + seg.size] = seg
        pos += burst + int(rng.uniform(0.1, 0.5) * sample_rate)
    signal = signal * envelope
    rms = np.sqrt(np.mean(signal ** 2))
    return signal / rms if rms > 0 else signal


def mix(early, late, near_end, noise_seed, ner_db: float, enr_db: float):
    """Scale near-end and fresh white noise to the configured NER/ENR."""
    early = np.asarray(early, dtype=float)
    late = np.asarray(late, dtype=float)
    near_end = np.asarray(near_end, dtype=float)
    echo = early + late
    echo_power = np.sum(echo ** 2)
    if echo_power <= 0:
        raise ValueError("echo is silent; NER/ENR scaling is undefined")
    s_power = np.sum(near_end ** 2)
    if s_power > 0:
        near_end = near_end * np.sqrt(
            echo_power / s_power * 10.0 ** (ner_db / 10.0))
    noise = np.random.default_rng(noise_seed).standard_normal(echo.size)
    noise *= np.sqrt(echo_power / np.sum(noise ** 2)
                     * 10.0 ** (-enr_db / 10.0))
    mic = early + late + near_end + noise
    return near_end, noise, mic


def build_scenario(config: ScenarioConfig, far_end=None, near_end=None) -> Scenario:
    """Realize a full scenario, with hard RIR switches at the EPC times."""
    n = int(round(config.duration * config.sample_rate))
    n -= n % config.block_shift
    rng = np.random.default_rng(config.seed)
    if far_end is None:
        far_end = speech_like(n, config.sample_rate, rng)
    else:
        far_end = np.asarray(far_end, dtype=float)[:n]
        if far_end.size < n:
            far_end = np.pad(far_end, (0, n - far_end.size))
    if near_end is None and not config.near_end_silent:
        near_end = speech_like(n, config.sample_rate, rng)
    elif near_end is None:
        near_end = np.zeros(n)
    else:
        near_end = np.asarray(near_end, dtype=float)[:n]
        if near_end.size < n:
            near_end = np.pad(near_end, (0, n - near_end.size))

    # segment boundaries snap to the block grid
    boundaries = [0]
    for t in config.epc_times:
        sample = int(round(t * config.sample_rate / config.block_shift)) \
            * config.block_shift
        boundaries.append(min(max(sample, config.block_shift),
                              n - config.block_shift))
    boundaries.append(n)

    early = np.zeros(n)
    late = np.zeros(n)
    segments = []
    for k in range(len(boundaries) - 1):
        start, stop = boundaries[k], boundaries[k + 1]
        rir = generate_rir(config.rir_t60, config.rir_len,
                           config.sample_rate,
                           np.random.default_rng([config.seed, 7, k]))
        seg_early, seg_late = render_echo(far_end, rir, config.filter_len)
        early[start:stop] = seg_early[start:stop]
        late[start:stop] = seg_late[start:stop]
        segments.append((start, rir))

    noise_seed = np.random.default_rng([config.seed, 11])
    near_end, noise, mic = mix(early, late, near_end, noise_seed,
                               config.ner_db, config.enr_db)

    # common rescale keeps WAV-range amplitudes without touching the ratios
    peak = max(np.max(np.abs(mic)), np.max(np.abs(far_end)), 1e-12)
    scale = 0.9 / peak if peak > 0.9 else 1.0
    return Scenario(
        config=config,
        far_end=far_end * scale,
        near_end=near_end * scale,
        noise=noise * scale,
        echo_early=early * scale,
        echo_late=late * scale,
        mic=mic * scale,
        rir_segments=segments,
    )


def wav_write(path, signal, sample_rate: int) -> None:
    signal = np.asarray(signal, dtype=float)
    pcm = np.round(np.clip(signal, -1.0, 1.0) * 32767.0).astype(np.int16)
    wavfile.write(path, sample_rate, pcm)


def wav_read(path):
    sample_rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError("only mono WAV files are supported")
    if data.dtype != np.int16:
        raise ValueError("only 16-bit PCM WAV files are supported")
    return data.astype(float) / 32767.0, sample_rate


def write_manifest(path, config: ScenarioConfig) -> None:
    doc = asdict(config)
    doc["epc_times"] = list(config.epc_times)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def read_manifest(path) -> ScenarioConfig:
    with open(path) as fh:
        doc = json.load(fh)
    doc["epc_times"] = tuple(doc.get("epc_times", ()))
    return ScenarioConfig(**doc)

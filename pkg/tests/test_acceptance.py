"""End-to-end acceptance gate for the echo-cancellation engine.

Each test prints a single "criterion N ...: PASS|FAIL" line so the suite
can be scanned at a glance when run with `pytest -s`. Absolute numbers
from large-corpus evaluations are not reproducible on synthetic desk
scenarios, so the later criteria check orderings and trends instead of
fixed values.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

from kfaec.blocks import BlockSpec, FarEndBuffer, filter_partitions_from_fir, pbc_early_echo
from kfaec.experiments import GridCell, compare_estimators
from kfaec.pipeline import RunConfig, process_stream
from kfaec.psd import MinStatState, update_noise_floor
from kfaec.scenario import ScenarioConfig, build_scenario
from kfaec.stft import analysis_window, cola_synthesis_window, stft_analyze, stft_synthesize


def _report(number: int, title: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {number} {title}: {status}{suffix}", file=sys.stderr)
    assert passed, f"criterion {number} {title}{suffix}"


def test_criterion_1_convolution_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for case in range(20):
        shift = int(rng.choice([64, 256]))
        partitions = int(rng.choice([1, 4, 8]))
        spec = BlockSpec.create(shift, partitions)
        fir = rng.standard_normal(spec.filter_len)
        filters = filter_partitions_from_fir(fir, spec)
        n_blocks = partitions + 8
        signal = rng.standard_normal(n_blocks * shift)
        reference = np.convolve(signal, fir)[:signal.size]
        buf = FarEndBuffer(spec)
        out = np.zeros_like(signal)
        for tau in range(n_blocks):
            sl = slice(tau * shift, (tau + 1) * shift)
            buf.advance(signal[sl])
            out[sl], _ = pbc_early_echo(filters, buf)
        err = np.max(np.abs(out[spec.filter_len:]
                            - reference[spec.filter_len:]))
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    _report(1, "convolution oracle", worst < 1e-8 and elapsed < 10.0,
            f"max err {worst:.2e}, {elapsed:.1f} s")


def test_criterion_2_stft_round_trip():
    start = time.perf_counter()
    window = analysis_window(512)
    synthesis = cola_synthesis_window(window)
    rng = np.random.default_rng(7)
    signal = rng.standard_normal(5 * 16000 - (5 * 16000) % 256)
    frames = []
    prev = np.zeros(256)
    for tau in range(signal.size // 256):
        cur = signal[tau * 256:(tau + 1) * 256]
        frames.append(stft_analyze(prev, cur, window))
        prev = cur
    out = stft_synthesize(frames, synthesis)
    recon = out[256:]
    ref = signal[:recon.size]
    err = np.max(np.abs(recon[512:-512] - ref[512:-512]))
    elapsed = time.perf_counter() - start
    _report(2, "STFT round trip", err < 1e-6 and elapsed < 5.0,
            f"max err {err:.2e}, {elapsed:.1f} s")


def test_criterion_3_kalman_convergence():
    start = time.perf_counter()
    scen = build_scenario(ScenarioConfig(duration=10.0, seed=33,
                                         enr_db=30.0, near_end_silent=True))
    config = RunConfig(estimator="oracle", mask_source="unity")
    result = process_stream(config, scen.far_end, scen.mic, scen)
    block_rate = 16000 // 256
    last_second = result.metrics.erle_series[-block_rate:]
    erle = float(np.mean(last_second))
    elapsed = time.perf_counter() - start
    _report(3, "Kalman convergence", erle >= 20.0 and elapsed < 30.0,
            f"ERLE {erle:.1f} dB, {elapsed:.1f} s")


@pytest.fixture(scope="module")
def epc_comparison():
    base_run = RunConfig(mask_source="oracle")
    base_scen = ScenarioConfig(duration=16.0, epc_times=(8.0,),
                               ner_db=0.0, enr_db=30.0, seed=100)
    cells = [GridCell("baseline", 0.99), GridCell("baseline", 0.9999),
             GridCell("proposed", 0.99)]
    start = time.perf_counter()
    results = compare_estimators(cells, base_run, base_scen, n_scenarios=10)
    elapsed = time.perf_counter() - start
    return {res.cell.label: res for res in results}, elapsed


def test_criterion_4_baseline_tradeoff(epc_comparison):
    results, _ = epc_comparison
    slow = results["baseline-A0.9999"]
    fast = results["baseline-A0.99"]
    steady_gap = slow.steady_state_db - fast.steady_state_db
    ratio = slow.recovery_time_s / fast.recovery_time_s
    _report(4, "baseline steady-state/reconvergence trade-off",
            steady_gap >= 1.0 and ratio >= 1.5,
            f"steady +{steady_gap:.2f} dB, recovery x{ratio:.2f}")


def test_criterion_5_proposed_estimator(epc_comparison):
    results, elapsed = epc_comparison
    proposed = results["proposed-A0.99"]
    baselines = [results["baseline-A0.99"], results["baseline-A0.9999"]]
    best_steady = max(b.steady_state_db for b in baselines)
    fastest = min(b.recovery_time_s for b in baselines)
    steady_ok = proposed.steady_state_db >= best_steady - 1.0
    recovery_ok = proposed.recovery_time_s <= fastest
    _report(5, "proposed estimator steady state and reconvergence",
            steady_ok and recovery_ok and elapsed < 300.0,
            f"steady {proposed.steady_state_db:.2f} vs best {best_steady:.2f} dB, "
            f"recovery {proposed.recovery_time_s:.2f} vs {fastest:.2f} s, "
            f"grid {elapsed:.0f} s")


def test_criterion_6_postfilter_ordering():
    config = RunConfig(mask_source="oracle", estimator="proposed")
    e_kf, e_pf = [], []
    for k in range(10):
        scen = build_scenario(ScenarioConfig(duration=6.0, seed=500 + k,
                                             ner_db=0.0, enr_db=30.0))
        result = process_stream(config, scen.far_end, scen.mic, scen)
        e_kf.append(result.metrics.erle_avg)
        e_pf.append(result.metrics.erle_pf)
    mean_kf = float(np.mean(e_kf))
    mean_pf = float(np.mean(e_pf))
    _report(6, "postfilter improves echo suppression", mean_pf > mean_kf,
            f"E_PF {mean_pf:.1f} > E_KF {mean_kf:.1f} dB")


def test_criterion_7_minimum_statistics_bias():
    rng = np.random.default_rng(77)
    m, shift, sigma = 512, 256, 0.3
    true_psd = shift * sigma ** 2
    state = MinStatState.initial(m, smoothing=0.9, kappa=90)
    ratios = []
    for _ in range(30 * 16000 // shift):
        block = sigma * rng.standard_normal(shift)
        spectrum = np.fft.fft(np.concatenate([np.zeros(shift), block]))
        state, floor = update_noise_floor(state, np.zeros(m), spectrum)
        ratios.append(floor / true_psd)
    median = np.median(np.asarray(ratios[200:]), axis=0)
    lo, hi = float(np.min(median)), float(np.max(median))
    _report(7, "minimum-statistics bias", lo >= 0.2 and hi <= 1.2,
            f"per-bin medians in [{lo:.2f}, {hi:.2f}]")


def test_criterion_8_real_time_factor():
    scen = build_scenario(ScenarioConfig(duration=10.0, seed=88))
    config = RunConfig(mask_source="oracle", estimator="proposed")
    result = process_stream(config, scen.far_end, scen.mic, scen)
    rtf = result.metrics.rtf
    _report(8, "real-time factor", rtf < 0.5, f"RTF {rtf:.3f}")


def test_criterion_9_invariant_suite():
    suite = str(Path(__file__).with_name("test_properties.py"))
    exit_code = pytest.main(["-q", "--no-header", "-p", "no:cacheprovider",
                             suite])
    _report(9, "randomized invariant suite", exit_code == 0,
            ">=1000 cases per invariant")

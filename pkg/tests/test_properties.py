"""Randomized invariant checks over the engine's core state updates.

Each property runs at least 1000 generated cases; the geometry is kept
small (short blocks, few partitions) so the suite stays fast.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kfaec import kalman, psd
from kfaec.blocks import BlockSpec, FarEndBuffer, apply_gradient_constraint
from kfaec.postfilter import RecurrentState, infer_mask, oracle_mask, random_weights

SPEC = BlockSpec.create(4, 2)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
nonneg = st.floats(0.0, 1e3, allow_nan=False, allow_infinity=False)
unit = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.tuples(arrays(float, shape, elements=finite),
                     arrays(float, shape, elements=finite)).map(
        lambda pair: pair[0] + 1j * pair[1])


def buffer_from(blocks):
    buf = FarEndBuffer(SPEC)
    for block in blocks:
        buf.advance(block)
    return buf


@settings(max_examples=1000, deadline=None)
@given(arrays(float, (SPEC.partitions + 1, SPEC.shift), elements=finite),
       arrays(float, (SPEC.partitions, SPEC.dft_len), elements=nonneg),
       arrays(float, SPEC.dft_len, elements=nonneg),
       st.floats(1e-12, 1e-6))
def test_step_size_nonnegative_and_finite(blocks, p_plus, psi, eps):
    step = kalman.compute_step_size(p_plus, buffer_from(blocks), psi,
                                    SPEC, eps)
    assert np.all(np.isfinite(step.lambda_diag))
    assert np.all(step.lambda_diag >= 0.0)


@settings(max_examples=1000, deadline=None)
@given(arrays(float, (SPEC.partitions + 1, SPEC.shift), elements=finite),
       complex_arrays(SPEC.dft_len),
       arrays(float, (SPEC.partitions, SPEC.dft_len), elements=nonneg))
def test_update_keeps_uncertainty_nonnegative(blocks, error, p_plus):
    buf = buffer_from(blocks)
    state = kalman.KalmanState.initial(SPEC)
    step = kalman.compute_step_size(p_plus, buf,
                                    np.full(SPEC.dft_len, 0.1), SPEC)
    new = kalman.update(state, step, buf, error, p_plus, SPEC)
    assert np.all(new.p_diag >= 0.0)
    assert np.all(np.isfinite(new.p_diag))


@settings(max_examples=1000, deadline=None)
@given(arrays(float, (SPEC.partitions + 1, SPEC.shift), elements=finite),
       complex_arrays(SPEC.dft_len),
       arrays(float, (SPEC.partitions, SPEC.dft_len),
              elements=st.floats(0.0, 10.0)))
def test_update_keeps_filter_in_constraint_image(blocks, error, p_plus):
    buf = buffer_from(blocks)
    state = kalman.KalmanState.initial(SPEC)
    step = kalman.compute_step_size(p_plus, buf,
                                    np.full(SPEC.dft_len, 0.1), SPEC)
    new = kalman.update(state, step, buf, error, p_plus, SPEC)
    for b in range(SPEC.partitions):
        tail = np.fft.ifft(new.w_hat[b])[SPEC.shift:]
        assert np.max(np.abs(tail)) < 1e-6 * max(
            1.0, np.max(np.abs(new.w_hat[b])))


@settings(max_examples=1000, deadline=None)
@given(complex_arrays(8))
def test_gradient_constraint_idempotent(spectrum):
    once = apply_gradient_constraint(spectrum)
    twice = apply_gradient_constraint(once)
    scale = max(1.0, float(np.max(np.abs(once))))
    assert np.max(np.abs(twice - once)) < 1e-9 * scale


@settings(max_examples=1000, deadline=None)
@given(arrays(float, 8, elements=unit), complex_arrays(8),
       arrays(float, 8, elements=nonneg), st.floats(0.0, 0.99))
def test_psd_updates_stay_nonnegative(mask, error, psi0, smoothing):
    near = psd.NearEndPsdState(psi0.copy(), smoothing)
    near = psd.update_near_end_psd(near, mask, error)
    assert np.all(near.psi >= 0.0)

    floor_state = psd.MinStatState.initial(8, smoothing, kappa=4)
    floor_state, floor = psd.update_noise_floor(floor_state, mask, error)
    assert np.all(floor >= 0.0)

    total = psd.observation_noise_psd(near.psi, floor)
    assert np.all(total >= 0.0)
    assert np.all(np.isfinite(total))


@settings(max_examples=1000, deadline=None)
@given(complex_arrays((2, 8)), st.floats(0.01, 0.9999),
       st.floats(0.0, 0.99))
def test_process_noise_nonnegative(w_hat, transition, smoothing):
    state = psd.ProcessNoiseState.initial(2, 8, smoothing)
    state, psi_dw = psd.update_process_noise(state, w_hat, transition)
    assert np.all(psi_dw >= 0.0)
    assert np.all(state.psi_w >= 0.0)


@settings(max_examples=1000, deadline=None)
@given(complex_arrays(6), complex_arrays(6), st.floats(1e-15, 1e-6))
def test_oracle_mask_bounded(s_frame, e_frame, eps):
    gains = oracle_mask(s_frame, e_frame, eps)
    assert np.all(gains >= 0.0)
    assert np.all(gains <= 1.0)


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2 ** 32 - 1),
       arrays(float, 10, elements=st.floats(-50, 50, allow_nan=False)))
def test_network_gains_bounded(seed, features):
    weights = random_weights(10, 4, 5, np.random.default_rng(seed),
                             scale=1.0)
    gains, state = infer_mask(weights, features, RecurrentState.initial(4))
    assert np.all(gains >= 0.0)
    assert np.all(gains <= 1.0)
    assert np.all(np.abs(state.h1) <= 1.0)
    assert np.all(np.abs(state.h2) <= 1.0)


@settings(max_examples=1000, deadline=None)
@given(arrays(float, (SPEC.partitions + 1, SPEC.shift), elements=finite),
       complex_arrays(SPEC.dft_len),
       arrays(float, (SPEC.partitions, SPEC.dft_len), elements=nonneg))
def test_kalman_update_deterministic(blocks, error, p_plus):
    buf = buffer_from(blocks)
    state = kalman.KalmanState.initial(SPEC)
    psi = np.full(SPEC.dft_len, 0.5)

    def run():
        step = kalman.compute_step_size(p_plus, buf, psi, SPEC)
        new = kalman.update(state, step, buf, error, p_plus, SPEC)
        return new.w_hat.copy(), new.p_diag.copy()

    w1, p1 = run()
    w2, p2 = run()
    assert np.array_equal(w1, w2)
    assert np.array_equal(p1, p2)

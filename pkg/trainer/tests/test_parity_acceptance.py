"""Cross-boundary acceptance: trainer output consumed by the inference engine.

The engine package (kfaec) is imported here only to verify the shared
file formats; the trainer itself never depends on it.
"""

import numpy as np
import torch

from aectrainer.data import TrainingData
from aectrainer.export import export_weights, load_parity
from aectrainer.model import MaskNet
from aectrainer.train import TrainConfig, train

from kfaec.postfilter import RecurrentState, infer_mask, load_weights


def test_criterion_11_cross_boundary_parity(tmp_path):
    torch.manual_seed(42)
    model = MaskNet(input_dim=18, hidden_dim=16, output_dim=9)
    model.set_normalization(np.zeros(18), np.ones(18))
    weights_path = tmp_path / "net.aecw"
    parity_path = tmp_path / "net.parity"
    export_weights(model, weights_path, parity_path, seed=1)

    frames, trainer_masks = load_parity(parity_path)
    engine_weights = load_weights(weights_path)
    state = RecurrentState.initial(engine_weights.hidden_dim)
    worst = 0.0
    half = engine_weights.output_dim
    for frame, expected in zip(frames, trainer_masks):
        gains, state = infer_mask(engine_weights, frame, state)
        worst = max(worst, float(np.max(np.abs(gains[:half] - expected))))

    # overfit sanity: a 10-frame set must be fit far below its initial loss
    rng = np.random.default_rng(3)
    data = TrainingData(
        mu=np.zeros(18, dtype=np.float32),
        sigma=np.ones(18, dtype=np.float32),
        features=rng.standard_normal((10, 18)).astype(np.float32),
        error_mag=rng.uniform(0.5, 2.0, (10, 9)).astype(np.float32),
        target_mag=rng.uniform(0.1, 1.0, (10, 9)).astype(np.float32),
    )
    config = TrainConfig(hidden_dim=16, learning_rate=1e-3, epochs=500,
                         sequence_len=10, seed=4)
    _, curve = train(config, data)
    # the KL loss can go negative; measure progress toward its minimum
    floor = float(np.sum(
        -data.target_mag * np.log(np.maximum(data.target_mag, 1e-12))
        + data.target_mag)) / 10
    overfit_ok = (curve[-1] - floor) < 0.1 * (curve[0] - floor)

    passed = worst < 1e-5 and overfit_ok
    print(f"criterion 11 cross-boundary parity: "
          f"{'PASS' if passed else 'FAIL'} "
          f"(max abs diff {worst:.2e}; loss {curve[0]:.3f} -> {curve[-1]:.3f},"
          f" floor {floor:.3f})")
    assert worst < 1e-5
    assert overfit_ok


def test_trained_weights_run_in_engine_pipeline(tmp_path):
    # end-to-end: engine exports data, trainer fits, engine runs the result
    from kfaec.dataset import export_training_data
    from kfaec.pipeline import RunConfig, process_stream
    from kfaec.scenario import ScenarioConfig, build_scenario

    engine_cfg = RunConfig(shift=64, partitions=4, mask_source="oracle")
    scen = build_scenario(ScenarioConfig(duration=1.0, seed=21, rir_len=256,
                                         filter_len=256, block_shift=64))
    data_path = tmp_path / "train.bin"
    export_training_data(data_path, engine_cfg, [scen])

    from aectrainer.data import load_training_data
    data = load_training_data(data_path)
    model, _ = train(TrainConfig(hidden_dim=16, epochs=3, seed=5), data)
    weights_path = tmp_path / "net.aecw"
    export_weights(model, weights_path, tmp_path / "net.parity")

    run_cfg = RunConfig(shift=64, partitions=4, mask_source="network",
                        weights_path=str(weights_path))
    result = process_stream(run_cfg, scen.far_end, scen.mic, scen)
    assert np.all(np.isfinite(result.s_hat))
    assert np.all(result.masks >= 0.0) and np.all(result.masks <= 1.0)

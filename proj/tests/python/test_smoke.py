# Copyright 2026 The psenh Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

import json
import math

import numpy as np
import pytest

import psenh


def test_metric_examples():
    assert psenh.si_sdr([1.0, 0.0], [1.0, 1.0]) == (0.0, False)
    db, capped = psenh.sd_sdr([0.3, -0.2, 0.9], [0.6, -0.4, 1.8])
    assert round(db, 3) == 6.021 and not capped
    assert psenh.si_sdr([0.3, -0.2, 0.9], [0.3, -0.2, 0.9]) == (psenh.SDR_CAP_DB, True)
    assert psenh.se_loss([0.3, -0.2, 0.9], [0.3, -0.2, 0.9]) == -psenh.SDR_CAP_DB


def test_errors_map_to_python_exceptions():
    with pytest.raises(psenh.ZeroEnergyError):
        psenh.si_sdr([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(psenh.ShapeError):
        psenh.si_sdr([1.0, 0.0], [1.0, 0.0, 0.0])
    assert issubclass(psenh.ConfigError, psenh.Error)


def test_mix_at_snr_is_exact():
    rng = np.random.default_rng(0)
    s, n = rng.normal(size=4000), rng.normal(size=4000)
    mixture, scaled, gain = psenh.mix_at_snr(s, n, 7.5)
    assert abs(psenh.snr_db(s, scaled) - 7.5) < 1e-9
    np.testing.assert_array_equal(mixture, s + scaled)
    np.testing.assert_allclose(scaled, gain * n)


def test_stft_round_trip():
    x = np.random.default_rng(1).normal(size=256 * 40)
    y = psenh.stft_round_trip(x)
    assert np.max(np.abs(y[1024:-1024] - x[1024:-1024])) < 1e-6


def test_parameter_counts():
    assert psenh.param_count("gru64") == 169473
    assert psenh.param_count("gru256") == 1118721
    with pytest.raises(psenh.ConfigError):
        psenh.param_count("lstm")


def test_wav_round_trip(tmp_path):
    x = np.linspace(-0.5, 0.5, 1600)
    psenh.write_wav(tmp_path / "a.wav", x)
    y, rate = psenh.read_wav(tmp_path / "a.wav")
    assert rate == psenh.SAMPLE_RATE
    np.testing.assert_allclose(y, x, atol=1e-7)


def test_format_cell():
    assert psenh.format_cell(9.2, 0.721) == "9.20 (0.721)"


def test_tiny_pipeline(tmp_path):
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps({
        "name": "tiny",
        "output_dir": str(tmp_path / "run"),
        "corpus": {"root": str(tmp_path / "corpus"), "synthetic": {
            "test_speakers": 2, "test_speaker_sec": 16.0, "general_speakers": 3,
            "general_speaker_sec": 6.0, "noise_train_files": 4, "noise_test_files": 3,
            "noise_premix_files": 2, "noise_file_sec": 2.0, "premix_file_sec": 4.0}},
        "architectures": ["gru8"],
        "ft_budgets_sec": [0, 3],
        "pretrain": {"batch_size": 4, "max_steps": 2, "validation_every": 2,
                     "validation_size": 2, "clip_sec": 0.5, "prefetch": 0},
        "finetune": {"batch_size": 4, "max_steps": 2, "validation_every": 2,
                     "validation_size": 2, "clip_sec": 0.5, "prefetch": 0},
        "scheme_overrides": {"cm": {"batch_size": 2}},
        "eval": {"n_mixtures": 4},
    }))
    cfg = psenh.load_config(cfg_path, ["seeds=[3]"])
    assert cfg["seeds"] == [3]
    summary = psenh.run(cfg)
    assert summary["units_run"] > 0
    grid = summary["grid"]
    assert len(grid["cells"]) == 8
    assert psenh.merge_runs([summary["output_dir"]]) == grid
    assert "Random init" in psenh.render_table(grid)

    again = psenh.run(cfg)
    assert again["units_run"] == 0

    ckpt = tmp_path / "run" / "checkpoints" / "finetune" / "gru8" / "seed3" / "test00" / "cm_10dB_3s.ckpt"
    enhancer = psenh.Enhancer(ckpt)
    assert enhancer.architecture == "gru8"
    assert enhancer.scheme == "finetune"
    x = np.random.default_rng(2).normal(scale=0.1, size=8000)
    y = enhancer(x)
    assert y.shape == x.shape and np.all(np.isfinite(y))
    assert math.isclose(enhancer.provenance["ft_budget_sec"], 3.0)

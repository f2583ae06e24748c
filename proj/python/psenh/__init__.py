# Copyright 2026 The psenh Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Personalized speech enhancement with self-supervised pretraining."""

from psenh._core import (
    SAMPLE_RATE,
    SDR_CAP_DB,
    ConfigError,
    DataError,
    DivergenceError,
    Enhancer,
    Error,
    ShapeError,
    ZeroEnergyError,
    format_cell,
    generate_synthetic_corpus,
    load_config,
    merge_runs,
    mix_at_snr,
    param_count,
    read_wav,
    render_table,
    run,
    sd_sdr,
    se_loss,
    si_sdr,
    si_sdr_improvement,
    snr_db,
    stft_round_trip,
    write_wav,
)

__version__ = "0.1.0"

__all__ = [
    "SAMPLE_RATE",
    "SDR_CAP_DB",
    "ConfigError",
    "DataError",
    "DivergenceError",
    "Enhancer",
    "Error",
    "ShapeError",
    "ZeroEnergyError",
    "format_cell",
    "generate_synthetic_corpus",
    "load_config",
    "merge_runs",
    "mix_at_snr",
    "param_count",
    "read_wav",
    "render_table",
    "run",
    "sd_sdr",
    "se_loss",
    "si_sdr",
    "si_sdr_improvement",
    "snr_db",
    "stft_round_trip",
    "write_wav",
]

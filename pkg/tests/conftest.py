from __future__ import annotations

import numpy as np
import pytest

from earmetrics import AudioBuffer, integrated_lufs, save_wav
from helpers import ACCEPTANCE_LINES, calibrated_burst_buffer


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdicts where pytest capture cannot hide them."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _noise_at_lufs(rate: int, target_lufs: float, seed: int) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    x = 0.05 * rng.standard_normal((2, 5 * rate))
    measured = integrated_lufs(AudioBuffer(x, rate)).lufs_i
    return AudioBuffer(x * 10 ** ((target_lufs - measured) / 20), rate)


@pytest.fixture(scope="session")
def curation_corpus(tmp_path_factory) -> dict:
    """Six-file corpus covering every curation gate exactly once.

    Expected outcome under the default thresholds: only ``f_ok.wav``
    survives; the others trip, in filename order, the rate gate, both
    loudness gates, and the true-peak gate twice.
    """
    root = tmp_path_factory.mktemp("corpus")
    rate = 44100
    rng = np.random.default_rng(97)

    low = AudioBuffer(0.05 * rng.standard_normal((2, 2 * 32000)), 32000)
    save_wav(root / "a_lowrate.wav", low, sample_format="float32")

    save_wav(root / "b_quiet.wav", _noise_at_lufs(rate, -30.0, seed=98), sample_format="float32")
    save_wav(root / "c_loud.wav", _noise_at_lufs(rate, -3.0, seed=99), sample_format="float32")

    save_wav(root / "d_tp15.wav", calibrated_burst_buffer(rate, 1.5, seed=100), sample_format="float32")
    save_wav(root / "e_tp10.wav", calibrated_burst_buffer(rate, 1.0, seed=101), sample_format="float32")

    ok = AudioBuffer(0.05 * rng.standard_normal((2, 5 * rate)), rate)
    save_wav(root / "f_ok.wav", ok, sample_format="float32")

    return {
        "dir": root,
        "expected_reasons": {
            "a_lowrate.wav": "below_rate",
            "b_quiet.wav": "lufs_low",
            "c_loud.wav": "lufs_high",
            "d_tp15.wav": "true_peak_exceeded",
            "e_tp10.wav": "true_peak_exceeded",
            "f_ok.wav": "none",
        },
    }

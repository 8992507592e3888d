"""Integrated loudness (LUFS-I) and oversampled true-peak measurement.

Loudness follows the BS.1770/R128 gating recipe: K-weight each channel,
form 400 ms blocks at 75% overlap, drop blocks at or below -70 LUFS, then
drop blocks at or below 10 LU under the ungated mean. True peak upsamples
4x through a windowed-sinc interpolator (48 taps per phase) and reports the
oversampled absolute maximum in dB.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import log10

import numpy as np
from scipy import signal as _signal

from .audio import AudioBuffer
from .weighting import apply_cascade, design_k_weighting

__all__ = [
    "LoudnessResult",
    "TruePeakResult",
    "integrated_lufs",
    "true_peak_dbtp",
    "dbtp_distance",
    "SILENCE_FLOOR_DBTP",
]

# Offset that calibrates a 997 Hz full-scale sine to -3.01 LUFS.
_LOUDNESS_OFFSET_DB = -0.691
_ABSOLUTE_GATE_LUFS = -70.0
_RELATIVE_GATE_LU = 10.0
_BLOCK_SECONDS = 0.4

SILENCE_FLOOR_DBTP = -200.0

_TP_FACTOR = 4
_TP_TAPS_TOTAL = 193  # 48 taps per polyphase branch


@dataclass(frozen=True)
class LoudnessResult:
    """Integrated loudness and the block counts behind it.

    ``lufs_i`` is ``-inf`` when every block falls below the absolute gate
    (digital silence); it is finite iff ``gated_block_count >= 1``.
    """

    lufs_i: float
    gated_block_count: int
    ungated_block_count: int


@dataclass(frozen=True)
class TruePeakResult:
    """True peak in dBTP overall and per channel."""

    dbtp: float
    per_channel: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_channel", tuple(float(v) for v in self.per_channel))
        if self.per_channel and self.dbtp != max(self.per_channel):
            raise ValueError("dbtp must equal the per-channel maximum")


def _block_mean_squares(channel: np.ndarray, block: int, step: int, count: int) -> np.ndarray:
    csum = np.concatenate([[0.0], np.cumsum(channel * channel)])
    starts = step * np.arange(count)
    return (csum[starts + block] - csum[starts]) / block


def integrated_lufs(buf: AudioBuffer) -> LoudnessResult:
    """Gated integrated loudness of a mono or stereo buffer.

    Channel weights are 1.0 for both left and right.

    Raises:
        ValueError: rate below 8 kHz or duration under one 400 ms block.
    """
    rate = buf.sample_rate
    if rate < 8000:
        raise ValueError(f"sample rate {rate} Hz too low for loudness gating (need >= 8000)")
    block = int(round(_BLOCK_SECONDS * rate))
    step = block // 4
    if buf.num_samples < block:
        raise ValueError(
            f"audio too short for loudness measurement: {buf.num_samples} samples "
            f"< one {block}-sample gating block"
        )
    weighted = apply_cascade(design_k_weighting(rate), buf)
    count = 1 + (buf.num_samples - block) // step
    power = np.zeros(count)
    for ch in weighted.samples:
        power += _block_mean_squares(ch, block, step, count)
    with np.errstate(divide="ignore"):
        block_loudness = _LOUDNESS_OFFSET_DB + 10.0 * np.log10(power)
    above_absolute = block_loudness > _ABSOLUTE_GATE_LUFS
    if not above_absolute.any():
        return LoudnessResult(float("-inf"), 0, count)
    relative_gate = (
        _LOUDNESS_OFFSET_DB + 10.0 * log10(power[above_absolute].mean()) - _RELATIVE_GATE_LU
    )
    gated = above_absolute & (block_loudness > relative_gate)
    if not gated.any():
        return LoudnessResult(float("-inf"), 0, count)
    lufs = _LOUDNESS_OFFSET_DB + 10.0 * log10(power[gated].mean())
    return LoudnessResult(float(lufs), int(gated.sum()), count)


@lru_cache(maxsize=1)
def _true_peak_taps() -> np.ndarray:
    taps = _signal.firwin(_TP_TAPS_TOTAL, 1.0 / _TP_FACTOR, window=("kaiser", 12.0))
    taps = taps * _TP_FACTOR  # restore unity passband gain after zero stuffing
    taps.flags.writeable = False
    return taps


def true_peak_dbtp(buf: AudioBuffer) -> TruePeakResult:
    """True peak via 4x polyphase oversampling.

    Digital silence reports the floor value ``SILENCE_FLOOR_DBTP``. Edges are
    padded so peaks within half a filter length of the boundaries are still
    seen.

    Raises:
        ValueError: on an empty buffer.
    """
    if buf.num_samples == 0:
        raise ValueError("cannot measure true peak of an empty buffer")
    taps = _true_peak_taps()
    pad = _TP_TAPS_TOTAL // (2 * _TP_FACTOR) + 1
    per_channel = []
    for ch in buf.samples:
        upsampled = _signal.upfirdn(taps, np.pad(ch, pad), up=_TP_FACTOR)
        peak = float(np.max(np.abs(upsampled)))
        per_channel.append(20.0 * log10(peak) if peak > 0.0 else SILENCE_FLOOR_DBTP)
    return TruePeakResult(dbtp=max(per_channel), per_channel=tuple(per_channel))


def dbtp_distance(ref: AudioBuffer, rec: AudioBuffer) -> float:
    """Absolute difference of the two signals' true peaks in dB."""
    return abs(true_peak_dbtp(ref).dbtp - true_peak_dbtp(rec).dbtp)

"""Multi-scale magnitude distances and the composite reconstruction objective.

Distances average an L1 log-magnitude error over a bank of STFT resolutions
(quarter-window hop at every scale). The composite objective combines the
log-magnitude term over all four mid/side/left/right components with the
correlation and phase losses over left/right only, under configurable
weights defaulting to (50, 10, 10).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import AudioBuffer, StftConfig, stft
from .phase import PhaseLossConfig, correlation_loss, phase_loss
from .stereo import split_mslr
from .weighting import apply_cascade, design_a_weighting, design_k_weighting

__all__ = [
    "MultiScaleConfig",
    "ObjectiveBreakdown",
    "DEFAULT_LAMBDAS",
    "mel_filterbank",
    "log_magnitude_distance",
    "mel_distance",
    "composite_objective",
]

DEFAULT_LAMBDAS = (50.0, 10.0, 10.0)

_PREFILTERS = ("none", "k", "a")


@dataclass(frozen=True)
class MultiScaleConfig:
    """Resolution bank for the multi-scale distances.

    ``mel_bins`` optionally fixes the mel band count per scale; by default
    each scale uses ``min(128, fft_size // 8)`` bands, which keeps the
    filterbank well conditioned at the smallest windows.
    """

    fft_sizes: tuple[int, ...] = (4096, 2048, 1024, 512, 256, 128)
    hop_ratio: float = 0.25
    window: str = "hann"
    log_epsilon: float = 1e-5
    mel_bins: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.fft_sizes)
        if not sizes:
            raise ValueError("fft_sizes must be non-empty")
        for n in sizes:
            if n < 2 or n & (n - 1):
                raise ValueError(f"fft sizes must be powers of two >= 2, got {n}")
        if not 0.0 < self.hop_ratio <= 1.0:
            raise ValueError(f"hop_ratio must be in (0, 1], got {self.hop_ratio!r}")
        if not self.log_epsilon > 0:
            raise ValueError(f"log_epsilon must be positive, got {self.log_epsilon!r}")
        if self.window != "hann":
            raise ValueError(f"unsupported window {self.window!r}")
        if self.mel_bins is not None:
            bins = tuple(int(m) for m in self.mel_bins)
            if len(bins) != len(sizes):
                raise ValueError(
                    f"mel_bins length {len(bins)} does not match {len(sizes)} fft sizes"
                )
            if any(m < 1 for m in bins):
                raise ValueError("mel_bins entries must be >= 1")
            object.__setattr__(self, "mel_bins", bins)
        object.__setattr__(self, "fft_sizes", sizes)

    def hop_for(self, fft_size: int) -> int:
        return max(1, int(fft_size * self.hop_ratio))

    def mel_bins_for(self, scale_index: int) -> int:
        if self.mel_bins is not None:
            return self.mel_bins[scale_index]
        return min(128, self.fft_sizes[scale_index] // 8)

    def stft_config(self, fft_size: int) -> StftConfig:
        return StftConfig(fft_size=fft_size, hop=self.hop_for(fft_size), window=self.window)

    @classmethod
    def evaluation(cls) -> "MultiScaleConfig":
        """Default six-scale bank, 4096 down to 128."""
        return cls()

    @classmethod
    def compact(cls) -> "MultiScaleConfig":
        """Narrower five-scale bank, 2048 down to 128, for training-time use."""
        return cls(fft_sizes=(2048, 1024, 512, 256, 128))


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Components of the composite objective and their weighted total."""

    stft_mag: float
    corr: float
    phase: float
    weighted_total: float
    lambda_stft_mag: float
    lambda_corr: float
    lambda_phase: float
    prefilter: str

    def as_dict(self) -> dict:
        return {
            "stft_mag": self.stft_mag,
            "corr": self.corr,
            "phase": self.phase,
            "weighted_total": self.weighted_total,
            "lambda_stft_mag": self.lambda_stft_mag,
            "lambda_corr": self.lambda_corr,
            "lambda_phase": self.lambda_phase,
            "prefilter": self.prefilter,
        }


def _hz_to_mel(f: np.ndarray | float) -> np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m: np.ndarray | float) -> np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=64)
def mel_filterbank(n_mels: int, fft_size: int, rate: int) -> np.ndarray:
    """Triangular mel filterbank on the HTK scale, peak gain 1 per band.

    Band edges run from 0 Hz to Nyquist; returns shape
    ``(n_mels, fft_size // 2 + 1)``.
    """
    if n_mels < 1:
        raise ValueError(f"n_mels must be >= 1, got {n_mels}")
    edges = _mel_to_hz(np.linspace(0.0, float(_hz_to_mel(rate / 2.0)), n_mels + 2))
    freqs = np.arange(fft_size // 2 + 1) * (rate / fft_size)
    lower = edges[:-2][:, np.newaxis]
    center = edges[1:-1][:, np.newaxis]
    upper = edges[2:][:, np.newaxis]
    rising = (freqs - lower) / (center - lower)
    falling = (upper - freqs) / (upper - center)
    fb = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    fb.flags.writeable = False
    return fb


def _check_pair(ref_ch: np.ndarray, rec_ch: np.ndarray, cfg: MultiScaleConfig) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(ref_ch, dtype=np.float64)
    b = np.asarray(rec_ch, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"channels must be equal-length 1-D arrays, got {a.shape} and {b.shape}")
    if a.shape[0] < max(cfg.fft_sizes):
        raise ValueError(
            f"signals of {a.shape[0]} samples are shorter than the largest analysis window "
            f"({max(cfg.fft_sizes)})"
        )
    return a, b


def log_magnitude_distance(
    ref_ch: np.ndarray,
    rec_ch: np.ndarray,
    rate: int,
    cfg: MultiScaleConfig | None = None,
) -> float:
    """Mean over scales of the mean L1 distance between log magnitudes.

    Per scale the error is ``mean |log(|S_ref| + eps) - log(|S_rec| + eps)|``
    over all frames and bins.
    """
    cfg = cfg or MultiScaleConfig()
    a, b = _check_pair(ref_ch, rec_ch, cfg)
    eps = cfg.log_epsilon
    per_scale = []
    for n in cfg.fft_sizes:
        sc = cfg.stft_config(n)
        mag_a = np.abs(stft(a, sc, rate).bins)
        mag_b = np.abs(stft(b, sc, rate).bins)
        per_scale.append(np.mean(np.abs(np.log(mag_a + eps) - np.log(mag_b + eps))))
    return float(np.mean(per_scale))


def mel_distance(
    ref_ch: np.ndarray,
    rec_ch: np.ndarray,
    rate: int,
    cfg: MultiScaleConfig | None = None,
) -> float:
    """Multi-scale log distance with magnitudes projected through mel bands."""
    cfg = cfg or MultiScaleConfig()
    a, b = _check_pair(ref_ch, rec_ch, cfg)
    eps = cfg.log_epsilon
    per_scale = []
    for i, n in enumerate(cfg.fft_sizes):
        sc = cfg.stft_config(n)
        fb = mel_filterbank(cfg.mel_bins_for(i), n, int(rate))
        mel_a = np.abs(stft(a, sc, rate).bins) @ fb.T
        mel_b = np.abs(stft(b, sc, rate).bins) @ fb.T
        per_scale.append(np.mean(np.abs(np.log(mel_a + eps) - np.log(mel_b + eps))))
    return float(np.mean(per_scale))


def composite_objective(
    ref: AudioBuffer,
    rec: AudioBuffer,
    cfg: MultiScaleConfig | None = None,
    prefilter: str = "none",
    lambdas: tuple[float, float, float] = DEFAULT_LAMBDAS,
    phase_cfg: PhaseLossConfig | None = None,
) -> ObjectiveBreakdown:
    """Weighted reconstruction objective over a stereo pair.

    The log-magnitude term averages over the mid, side, left, and right
    components; the correlation and phase terms average over left and right
    only, across every scale of ``cfg``. An optional pre-filter (``"k"`` or
    ``"a"``) is applied to both signals before any analysis.

    Raises:
        ValueError: on mono input, rate mismatch, or length mismatch.
    """
    cfg = cfg or MultiScaleConfig()
    phase_cfg = phase_cfg or PhaseLossConfig()
    if prefilter not in _PREFILTERS:
        raise ValueError(f"prefilter must be one of {_PREFILTERS}, got {prefilter!r}")
    if ref.channels != 2 or rec.channels != 2:
        raise ValueError("composite objective requires stereo signals")
    if ref.sample_rate != rec.sample_rate:
        raise ValueError(
            f"sample rates differ: {ref.sample_rate} vs {rec.sample_rate}"
        )
    if ref.num_samples != rec.num_samples:
        raise ValueError(f"lengths differ: {ref.num_samples} vs {rec.num_samples}")
    rate = ref.sample_rate
    if prefilter != "none":
        cascade = design_k_weighting(rate) if prefilter == "k" else design_a_weighting(rate)
        ref = apply_cascade(cascade, ref)
        rec = apply_cascade(cascade, rec)
    sig_ref = split_mslr(ref)
    sig_rec = split_mslr(rec)
    mag_terms = [
        log_magnitude_distance(sig_ref.component(c), sig_rec.component(c), rate, cfg)
        for c in ("mid", "side", "left", "right")
    ]
    corr_terms = []
    phase_terms = []
    for c in ("left", "right"):
        for n in cfg.fft_sizes:
            sc = cfg.stft_config(n)
            spec_ref = stft(sig_ref.component(c), sc, rate)
            spec_rec = stft(sig_rec.component(c), sc, rate)
            corr_terms.append(correlation_loss(spec_ref, spec_rec, phase_cfg))
            phase_terms.append(phase_loss(spec_ref, spec_rec, phase_cfg))
    stft_mag = float(np.mean(mag_terms))
    corr = float(np.mean(corr_terms))
    phase = float(np.mean(phase_terms))
    lam_mag, lam_corr, lam_phase = (float(v) for v in lambdas)
    total = lam_mag * stft_mag + lam_corr * corr + lam_phase * phase
    return ObjectiveBreakdown(
        stft_mag=stft_mag,
        corr=corr,
        phase=phase,
        weighted_total=total,
        lambda_stft_mag=lam_mag,
        lambda_corr=lam_corr,
        lambda_phase=lam_phase,
        prefilter=prefilter,
    )

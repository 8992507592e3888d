"""Phase-coherence metrics, SI-SDR, and the full evaluation report.

ICPC (individual channel phase coherence) scores the stability of per-bin
phase error within a channel as an energy-weighted mean resultant length,
in percent. CCPC (cross channel phase coherence) applies the same statistic
to the preservation of the inter-channel phase difference. Both score a
constant phase offset as 100% by construction; the correlation loss is the
quantity that penalizes constant offsets.

:func:`evaluate_pair` assembles the six-metric report (mel distance, STFT
log distance, ICPC, CCPC, SI-SDR, true-peak distance) for one
reference/reconstruction pair.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer, ComplexSpectrogram, StftConfig, resample, stft
from .loudness import dbtp_distance
from .phase import wrap_phase
from .spectral import MultiScaleConfig, log_magnitude_distance, mel_distance
from .weighting import apply_cascade, design_a_weighting, design_k_weighting

__all__ = [
    "CoherenceConfig",
    "MetricReport",
    "SI_SDR_CAP_DB",
    "icpc",
    "ccpc",
    "icpc_from_spectra",
    "ccpc_from_spectra",
    "si_sdr",
    "align_pair",
    "evaluate_pair",
]

SI_SDR_CAP_DB = 100.0

_WEIGHT_MODES = ("product", "reference_energy")


@dataclass(frozen=True)
class CoherenceConfig:
    """STFT resolution, regularizer, and weighting mode for ICPC/CCPC.

    ``product`` weights bins by ``|S_ref| * |S_rec|`` (penalizing both
    hallucinated and missing energy); ``reference_energy`` uses
    ``|S_ref|**2``.
    """

    stft: StftConfig = StftConfig(fft_size=2048, hop=512)
    epsilon: float = 1e-8
    weight_mode: str = "product"

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.weight_mode not in _WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {_WEIGHT_MODES}, got {self.weight_mode!r}")


def _bins_of(spec: ComplexSpectrogram | np.ndarray) -> np.ndarray:
    bins = spec.bins if isinstance(spec, ComplexSpectrogram) else np.asarray(spec)
    if bins.ndim != 2:
        raise ValueError(f"spectrogram must be 2-D, got {bins.ndim}-D")
    return bins


def _resultant_percent(dphi: np.ndarray, weights: np.ndarray, eps: float) -> tuple[float, bool]:
    """Energy-weighted mean resultant length over frames, as a percent.

    Returns the score and a degeneracy flag that is set when the total
    weight is below ``eps`` (silent input), in which case the score is 100
    by convention rather than NaN.
    """
    resultant = np.abs(np.sum(weights * np.exp(1j * dphi), axis=1))
    frame_energy = np.sum(weights, axis=1)
    per_frame = resultant / (frame_energy + eps)
    total = float(np.sum(frame_energy))
    if total < eps:
        return 100.0, True
    score = 100.0 * float(np.sum(per_frame * frame_energy) / (total + eps))
    return float(np.clip(score, 0.0, 100.0)), False


def _icpc_core(
    ref: ComplexSpectrogram | np.ndarray,
    rec: ComplexSpectrogram | np.ndarray,
    cfg: CoherenceConfig,
) -> tuple[float, bool]:
    a = _bins_of(ref)
    b = _bins_of(rec)
    if a.shape != b.shape:
        raise ValueError(f"spectrogram shapes differ: {a.shape} vs {b.shape}")
    dphi = wrap_phase(np.angle(b) - np.angle(a))
    if cfg.weight_mode == "product":
        weights = np.abs(a) * np.abs(b)
    else:
        weights = np.abs(a) ** 2
    return _resultant_percent(dphi, weights, cfg.epsilon)


def _ccpc_core(
    ref_left: ComplexSpectrogram | np.ndarray,
    ref_right: ComplexSpectrogram | np.ndarray,
    rec_left: ComplexSpectrogram | np.ndarray,
    rec_right: ComplexSpectrogram | np.ndarray,
    cfg: CoherenceConfig,
) -> tuple[float, bool]:
    al, ar = _bins_of(ref_left), _bins_of(ref_right)
    bl, br = _bins_of(rec_left), _bins_of(rec_right)
    shapes = {al.shape, ar.shape, bl.shape, br.shape}
    if len(shapes) != 1:
        raise ValueError(f"spectrogram shapes differ: {sorted(shapes)}")
    ipd_ref = wrap_phase(np.angle(al) - np.angle(ar))
    ipd_rec = wrap_phase(np.angle(bl) - np.angle(br))
    dphi = wrap_phase(ipd_rec - ipd_ref)
    weights = np.sqrt(np.abs(al) * np.abs(ar) * np.abs(bl) * np.abs(br))
    return _resultant_percent(dphi, weights, cfg.epsilon)


def icpc_from_spectra(
    ref: ComplexSpectrogram | np.ndarray,
    rec: ComplexSpectrogram | np.ndarray,
    cfg: CoherenceConfig | None = None,
) -> float:
    """ICPC in percent from two precomputed single-channel spectrograms."""
    return _icpc_core(ref, rec, cfg or CoherenceConfig())[0]


def ccpc_from_spectra(
    ref_left: ComplexSpectrogram | np.ndarray,
    ref_right: ComplexSpectrogram | np.ndarray,
    rec_left: ComplexSpectrogram | np.ndarray,
    rec_right: ComplexSpectrogram | np.ndarray,
    cfg: CoherenceConfig | None = None,
) -> float:
    """CCPC in percent from the four precomputed channel spectrograms."""
    return _ccpc_core(ref_left, ref_right, rec_left, rec_right, cfg or CoherenceConfig())[0]


def icpc(
    ref_ch: np.ndarray,
    rec_ch: np.ndarray,
    rate: int,
    cfg: CoherenceConfig | None = None,
) -> float:
    """Individual channel phase coherence of one channel pair, in percent.

    Raises:
        ValueError: on length mismatch.
    """
    cfg = cfg or CoherenceConfig()
    a = np.asarray(ref_ch, dtype=np.float64)
    b = np.asarray(rec_ch, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"channels must be equal-length 1-D arrays, got {a.shape} and {b.shape}")
    return icpc_from_spectra(stft(a, cfg.stft, rate), stft(b, cfg.stft, rate), cfg)


def ccpc(ref: AudioBuffer, rec: AudioBuffer, cfg: CoherenceConfig | None = None) -> float:
    """Cross channel phase coherence of a stereo pair, in percent.

    Raises:
        ValueError: on mono input, rate mismatch, or length mismatch.
    """
    cfg = cfg or CoherenceConfig()
    if ref.channels != 2 or rec.channels != 2:
        raise ValueError("ccpc requires stereo signals")
    if ref.sample_rate != rec.sample_rate:
        raise ValueError(f"sample rates differ: {ref.sample_rate} vs {rec.sample_rate}")
    if ref.num_samples != rec.num_samples:
        raise ValueError(f"lengths differ: {ref.num_samples} vs {rec.num_samples}")
    rate = ref.sample_rate
    return ccpc_from_spectra(
        stft(ref.samples[0], cfg.stft, rate),
        stft(ref.samples[1], cfg.stft, rate),
        stft(rec.samples[0], cfg.stft, rate),
        stft(rec.samples[1], cfg.stft, rate),
        cfg,
    )


def si_sdr(ref: np.ndarray, rec: np.ndarray) -> float:
    """Scale-invariant signal-to-distortion ratio in dB, clamped to +/-100.

    The estimate is projected onto the reference (``alpha = <rec, ref> /
    <ref, ref>``) before the residual is measured. 2-D inputs of shape
    ``(channels, n)`` return the mean over channels.

    Raises:
        ValueError: on shape mismatch or an all-zero reference.
    """
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(rec, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        return float(np.mean([si_sdr(a[i], b[i]) for i in range(a.shape[0])]))
    if a.ndim != 1:
        raise ValueError(f"expected 1-D or 2-D input, got {a.ndim}-D")
    ref_power = float(np.dot(a, a))
    if ref_power == 0.0:
        raise ValueError("reference signal is all zeros")
    alpha = float(np.dot(b, a)) / ref_power
    target = alpha * a
    residual = b - target
    target_power = float(np.dot(target, target))
    residual_power = float(np.dot(residual, residual))
    if target_power == 0.0:
        return -SI_SDR_CAP_DB
    if residual_power == 0.0:
        return SI_SDR_CAP_DB
    value = 10.0 * np.log10(target_power / residual_power)
    return float(np.clip(value, -SI_SDR_CAP_DB, SI_SDR_CAP_DB))


@dataclass(frozen=True)
class MetricReport:
    """Six evaluation metrics plus configuration and input provenance.

    Serialized forms print percent and dB values with two decimals; the
    dataclass itself keeps full precision.
    """

    mel_dist: float
    stft_dist: float
    icpc_percent: float
    ccpc_percent: float
    si_sdr_db: float
    dbtp_dist: float
    config: dict = field(default_factory=dict)
    reference: str = "reference"
    reconstruction: str = "reconstruction"
    flags: tuple[str, ...] = ()

    METRIC_FIELDS = ("mel_dist", "stft_dist", "icpc_percent", "ccpc_percent", "si_sdr_db", "dbtp_dist")

    def __post_init__(self) -> None:
        for name in ("icpc_percent", "ccpc_percent"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name} must be within [0, 100], got {v!r}")
        object.__setattr__(self, "flags", tuple(self.flags))

    def to_json(self) -> str:
        """One-line JSON document with metrics at two decimals."""
        metrics = ", ".join(f'"{k}": {getattr(self, k):.2f}' for k in self.METRIC_FIELDS)
        return (
            "{"
            f'"reference": {json.dumps(self.reference)}, '
            f'"reconstruction": {json.dumps(self.reconstruction)}, '
            f"{metrics}, "
            f'"flags": {json.dumps(list(self.flags))}, '
            f'"config": {json.dumps(self.config, sort_keys=True)}'
            "}"
        )

    @staticmethod
    def csv_header() -> str:
        return ",".join(MetricReport.METRIC_FIELDS + ("reference", "reconstruction", "flags"))

    def to_csv_row(self) -> str:
        """Metric fields in declaration order, then identifiers and flags."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="")
        writer.writerow(
            [f"{getattr(self, k):.2f}" for k in self.METRIC_FIELDS]
            + [self.reference, self.reconstruction, ";".join(self.flags)]
        )
        return out.getvalue()


def align_pair(ref: AudioBuffer, rec: AudioBuffer) -> tuple[AudioBuffer, AudioBuffer, list[str]]:
    """Normalize a pair for comparison: stereo, common rate, common length.

    Mono inputs are duplicated to stereo, a reconstruction at a different
    rate is resampled to the reference rate (the reference is never
    altered), and both are truncated to the shorter length. Every adjustment
    is recorded as a flag.
    """
    flags: list[str] = []
    if ref.channels == 1:
        ref = AudioBuffer(np.vstack([ref.samples[0], ref.samples[0]]), ref.sample_rate)
        flags.append("mono_reference_duplicated")
    if rec.channels == 1:
        rec = AudioBuffer(np.vstack([rec.samples[0], rec.samples[0]]), rec.sample_rate)
        flags.append("mono_reconstruction_duplicated")
    if rec.sample_rate != ref.sample_rate:
        rec = resample(rec, ref.sample_rate)
        flags.append("reconstruction_resampled")
    if ref.num_samples != rec.num_samples:
        n = min(ref.num_samples, rec.num_samples)
        if n == 0:
            raise ValueError("signals have no overlapping samples")
        ref = AudioBuffer(ref.samples[:, :n], ref.sample_rate)
        rec = AudioBuffer(rec.samples[:, :n], rec.sample_rate)
        flags.append("truncated_to_common_length")
    return ref, rec, flags


def _evaluate_aligned(
    ref: AudioBuffer,
    rec: AudioBuffer,
    ms_cfg: MultiScaleConfig,
    coh_cfg: CoherenceConfig,
) -> tuple[dict, list[str]]:
    rate = ref.sample_rate
    flags: list[str] = []
    mel_vals = []
    stft_vals = []
    for ch in range(2):
        mel_vals.append(mel_distance(ref.samples[ch], rec.samples[ch], rate, ms_cfg))
        stft_vals.append(log_magnitude_distance(ref.samples[ch], rec.samples[ch], rate, ms_cfg))
    spec_ref = [stft(ref.samples[ch], coh_cfg.stft, rate) for ch in range(2)]
    spec_rec = [stft(rec.samples[ch], coh_cfg.stft, rate) for ch in range(2)]
    icpc_vals = []
    degenerate = False
    for ch in range(2):
        value, degen = _icpc_core(spec_ref[ch], spec_rec[ch], coh_cfg)
        icpc_vals.append(value)
        degenerate = degenerate or degen
    ccpc_value, degen = _ccpc_core(spec_ref[0], spec_ref[1], spec_rec[0], spec_rec[1], coh_cfg)
    degenerate = degenerate or degen
    if degenerate:
        flags.append("degenerate_coherence_input")
    metrics = {
        "mel_dist": float(np.mean(mel_vals)),
        "stft_dist": float(np.mean(stft_vals)),
        "icpc_percent": float(np.mean(icpc_vals)),
        "ccpc_percent": ccpc_value,
        "si_sdr_db": si_sdr(ref.samples, rec.samples),
        "dbtp_dist": dbtp_distance(ref, rec),
    }
    return metrics, flags


def evaluate_pair(
    ref: AudioBuffer,
    rec: AudioBuffer,
    ms_cfg: MultiScaleConfig | None = None,
    coh_cfg: CoherenceConfig | None = None,
    reference_id: str = "reference",
    reconstruction_id: str = "reconstruction",
    prefilter: str = "none",
    chunk_seconds: float | None = None,
) -> MetricReport:
    """Compute the full six-metric report for one pair.

    Inputs are aligned first (see :func:`align_pair`), then optionally
    pre-filtered (``"k"`` or ``"a"``) before all metrics. With
    ``chunk_seconds`` the aligned signals are cut into consecutive
    whole chunks of that duration, each chunk is evaluated, and the report
    carries the arithmetic mean of every metric over chunks.

    Raises:
        ValueError: on empty overlap, a chunk shorter than the largest
            analysis window, or an invalid prefilter name.
    """
    ms_cfg = ms_cfg or MultiScaleConfig()
    coh_cfg = coh_cfg or CoherenceConfig()
    if prefilter not in ("none", "k", "a"):
        raise ValueError(f"prefilter must be one of ('none', 'k', 'a'), got {prefilter!r}")
    ref, rec, flags = align_pair(ref, rec)
    rate = ref.sample_rate
    if prefilter != "none":
        cascade = design_k_weighting(rate) if prefilter == "k" else design_a_weighting(rate)
        ref = apply_cascade(cascade, ref)
        rec = apply_cascade(cascade, rec)
    min_len = max(max(ms_cfg.fft_sizes), coh_cfg.stft.fft_size)
    config = {
        "sample_rate": rate,
        "fft_sizes": list(ms_cfg.fft_sizes),
        "hop_ratio": ms_cfg.hop_ratio,
        "log_epsilon": ms_cfg.log_epsilon,
        "mel_bins": [ms_cfg.mel_bins_for(i) for i in range(len(ms_cfg.fft_sizes))],
        "coherence_fft_size": coh_cfg.stft.fft_size,
        "coherence_hop": coh_cfg.stft.hop,
        "coherence_epsilon": coh_cfg.epsilon,
        "weight_mode": coh_cfg.weight_mode,
        "si_sdr_cap_db": SI_SDR_CAP_DB,
        "prefilter": prefilter,
        "chunk_seconds": chunk_seconds,
    }
    if chunk_seconds is None:
        metrics, extra = _evaluate_aligned(ref, rec, ms_cfg, coh_cfg)
        flags.extend(extra)
    else:
        n_chunk = int(round(chunk_seconds * rate))
        if n_chunk < min_len:
            raise ValueError(
                f"chunk of {n_chunk} samples is shorter than the largest analysis window ({min_len})"
            )
        n_chunks = ref.num_samples // n_chunk
        if n_chunks == 0:
            metrics, extra = _evaluate_aligned(ref, rec, ms_cfg, coh_cfg)
            flags.extend(extra)
            flags.append("shorter_than_one_chunk")
        else:
            rows = []
            extra_flags: set[str] = set()
            for i in range(n_chunks):
                lo, hi = i * n_chunk, (i + 1) * n_chunk
                chunk_ref = AudioBuffer(ref.samples[:, lo:hi], rate)
                chunk_rec = AudioBuffer(rec.samples[:, lo:hi], rate)
                m, extra = _evaluate_aligned(chunk_ref, chunk_rec, ms_cfg, coh_cfg)
                rows.append(m)
                extra_flags.update(extra)
            metrics = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
            flags.extend(sorted(extra_flags))
            flags.append("chunked")
    return MetricReport(
        reference=reference_id,
        reconstruction=reconstruction_id,
        config=config,
        flags=tuple(flags),
        **metrics,
    )

"""Log-mel spectrogram front end feeding the embedding backends.

A mono clip at the configured rate becomes a frames x n_mels grid of natural
log mel energies, floored at ``log_floor``. Variable-duration recordings are
cut into fixed-length chunks (padded with floor rows) by ``fit_length``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .audio_io import AudioClip
from .errors import InvalidStd, RateMismatch

DEFAULT_TARGET_FRAMES = 1024  # ~10.24 s at a 10 ms hop


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 16000
    n_mels: int = 128
    window_ms: float = 25.0
    hop_ms: float = 10.0
    fmin: float = 0.0
    fmax: float = 8000.0
    log_floor: float = math.log(1e-10)

    def __post_init__(self):
        if not 0 <= self.fmin < self.fmax <= self.sample_rate / 2:
            raise ValueError(f"need 0 <= fmin < fmax <= rate/2, got {self.fmin}..{self.fmax}")
        if not self.window_ms >= self.hop_ms > 0:
            raise ValueError("need window_ms >= hop_ms > 0")
        if self.n_mels < 1:
            raise ValueError("need at least one mel band")

    @property
    def window_samples(self) -> int:
        return int(round(self.window_ms * self.sample_rate / 1000.0))

    @property
    def hop_samples(self) -> int:
        return int(round(self.hop_ms * self.sample_rate / 1000.0))

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.hop_samples


@dataclass
class FeatureMatrix:
    """frames x n_mels grid of log mel energies; every cell >= floor."""

    values: np.ndarray
    frame_rate: float
    floor: float

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")
        if self.values.size and self.values.min() < self.floor - 1e-12:
            raise ValueError("feature values must not fall below the floor")

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_mels(self) -> int:
        return self.values.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filter_centers(cfg: MelConfig) -> np.ndarray:
    """Center frequencies (Hz) of the n_mels triangular filters."""
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    return edges[1:-1]


def mel_filterbank(cfg: MelConfig, n_fft: int) -> np.ndarray:
    """Unit-height triangular filters, shape (n_mels, n_fft // 2 + 1)."""
    freqs = np.arange(n_fft // 2 + 1) * cfg.sample_rate / n_fft
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    fb = np.zeros((cfg.n_mels, freqs.size))
    for m in range(cfg.n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - left) / (center - left)
        down = (right - freqs) / (right - center)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def log_mel_spectrogram(clip: AudioClip, cfg: MelConfig) -> FeatureMatrix:
    """Hann-windowed power spectra pooled through the mel filterbank, log-floored."""
    if clip.sample_rate != cfg.sample_rate:
        raise RateMismatch(f"clip at {clip.sample_rate} Hz, config expects {cfg.sample_rate}")
    if clip.channels != 1:
        raise ValueError("log_mel_spectrogram expects a mono clip")

    x = clip.samples[0]
    win = cfg.window_samples
    hop = cfg.hop_samples
    if x.size >= win:
        n_frames = (x.size - win) // hop + 1
    else:
        n_frames = 1
        x = np.concatenate([x, np.zeros(win - x.size)])

    idx = hop * np.arange(n_frames)[:, None] + np.arange(win)[None, :]
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(win) / win)  # periodic Hann
    spectra = np.abs(np.fft.rfft(x[idx] * window, axis=1)) ** 2

    fb = mel_filterbank(cfg, win)
    mel_power = spectra @ fb.T

    floor_energy = math.exp(cfg.log_floor)
    with np.errstate(divide="ignore"):
        vals = np.log(mel_power)
    vals = np.where(mel_power >= floor_energy, np.maximum(vals, cfg.log_floor), cfg.log_floor)
    return FeatureMatrix(values=vals, frame_rate=cfg.frame_rate, floor=cfg.log_floor)


def normalize_features(f: FeatureMatrix, mean: float, std: float) -> FeatureMatrix:
    """Affine map (v - mean) / std applied cell-wise; the floor moves with it."""
    if std <= 0:
        raise InvalidStd(f"std must be positive, got {std}")
    return FeatureMatrix(
        values=(f.values - mean) / std,
        frame_rate=f.frame_rate,
        floor=(f.floor - mean) / std,
    )


def fit_length(f: FeatureMatrix, target_frames: int) -> list[FeatureMatrix]:
    """Split into consecutive target_frames chunks; the tail is padded with floor rows."""
    if target_frames < 1:
        raise ValueError("target_frames must be >= 1")

    def pad(rows: np.ndarray) -> np.ndarray:
        missing = target_frames - rows.shape[0]
        if missing == 0:
            return rows
        filler = np.full((missing, rows.shape[1]), f.floor)
        return np.concatenate([rows, filler], axis=0)

    chunks = []
    for start in range(0, max(f.frames, 1), target_frames):
        rows = f.values[start : start + target_frames]
        chunks.append(FeatureMatrix(values=pad(rows), frame_rate=f.frame_rate, floor=f.floor))
    return chunks

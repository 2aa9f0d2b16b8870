"""End-to-end preprocessing: raw WAV bytes to embeddings ready for the classifier.

This is the shared path behind the HTTP service, the CLI predict command,
and dataset embedding: parse, mono, resample to 16 kHz, log-mel features,
per-recording standardization, fixed-length chunking, backend embedding.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio_io import MAX_DURATION_S, TARGET_RATE, AudioClip, parse_wav, resample, to_mono
from .dsp import DEFAULT_TARGET_FRAMES, FeatureMatrix, MelConfig, fit_length, log_mel_spectrogram, normalize_features
from .embedding import Backend, Embedding, embed, embed_recording, source_hash
from .errors import ClipTooLong


def prepare_clip(data: bytes, max_duration_s: float = MAX_DURATION_S) -> AudioClip:
    """Decode WAV bytes into a mono 16 kHz clip, rejecting over-long audio."""
    clip = parse_wav(data)
    if clip.duration_s > max_duration_s:
        raise ClipTooLong(f"clip is {clip.duration_s:.1f} s, limit is {max_duration_s:.0f} s")
    return resample(to_mono(clip), TARGET_RATE)


def feature_chunks(clip: AudioClip, mel_cfg: MelConfig | None = None,
                   target_frames: int = DEFAULT_TARGET_FRAMES) -> list[FeatureMatrix]:
    """Standardized fixed-length log-mel chunks for one clip.

    Standardization uses the recording's own mean and std; constant
    feature matrices (pure silence) are passed through unchanged.
    """
    cfg = mel_cfg or MelConfig()
    feats = log_mel_spectrogram(clip, cfg)
    std = float(np.std(feats.values))
    if std > 1e-12:
        feats = normalize_features(feats, float(np.mean(feats.values)), std)
    return fit_length(feats, target_frames)


def chunk_embeddings(backend: Backend, data: bytes, mel_cfg: MelConfig | None = None,
                     target_frames: int = DEFAULT_TARGET_FRAMES,
                     max_duration_s: float = MAX_DURATION_S) -> list[Embedding]:
    """Per-chunk embeddings for one recording's raw bytes."""
    clip = prepare_clip(data, max_duration_s=max_duration_s)
    chunks = feature_chunks(clip, mel_cfg=mel_cfg, target_frames=target_frames)
    return embed_recording(backend, chunks, source_hash(data))


def recording_embedding(backend: Backend, data: bytes, mel_cfg: MelConfig | None = None,
                        target_frames: int = DEFAULT_TARGET_FRAMES) -> Embedding:
    """Single recording-level embedding (chunk mean) for training datasets."""
    clip = prepare_clip(data)
    chunks = feature_chunks(clip, mel_cfg=mel_cfg, target_frames=target_frames)
    return embed(backend, chunks, source_hash(data))


def embed_file(backend: Backend, path, mel_cfg: MelConfig | None = None) -> Embedding:
    return recording_embedding(backend, Path(path).read_bytes(), mel_cfg=mel_cfg)

"""Shared builders for tests: WAV bytes, synthetic embeddings, fixture models."""

from __future__ import annotations

import struct

import numpy as np

from voxmed.embedding import Embedding


def pcm16_payload(samples: np.ndarray, channels: int = 1) -> bytes:
    frames = (np.clip(np.asarray(samples), -1, 1) * 32767).astype("<i2")
    if channels > 1:
        frames = np.column_stack([frames] * channels).ravel()
    return frames.tobytes()


def float32_payload(samples: np.ndarray, channels: int = 1) -> bytes:
    frames = np.asarray(samples, dtype="<f4")
    if channels > 1:
        frames = np.column_stack([frames] * channels).ravel()
    return frames.tobytes()


def fmt_chunk(tag: int = 1, channels: int = 1, rate: int = 16000, bits: int = 16,
              extensible: bool = False, sub_tag: int | None = None) -> bytes:
    block = (bits // 8) * channels
    base = struct.pack("<HHIIHH", 0xFFFE if extensible else tag, channels, rate,
                       rate * block, block, bits)
    if not extensible:
        return base
    guid = struct.pack("<H", sub_tag if sub_tag is not None else tag) + bytes(14)
    return base + struct.pack("<HHI", 22, bits, 0x4) + guid


def build_wav(payload: bytes, fmt: bytes | None = None, pre_chunks: bytes = b"",
              mid_chunks: bytes = b"", data_size: int | None = None,
              riff_size: int | None = None) -> bytes:
    """Assemble a RIFF/WAVE byte string with full control over the layout."""
    fmt = fmt if fmt is not None else fmt_chunk()
    body = (
        pre_chunks
        + b"fmt " + struct.pack("<I", len(fmt)) + fmt + (b"\x00" if len(fmt) % 2 else b"")
        + mid_chunks
        + b"data" + struct.pack("<I", data_size if data_size is not None else len(payload))
        + payload
    )
    size = riff_size if riff_size is not None else 4 + len(body)
    return b"RIFF" + struct.pack("<I", size) + b"WAVE" + body


def chunk(chunk_id: bytes, body: bytes) -> bytes:
    return chunk_id + struct.pack("<I", len(body)) + body + (b"\x00" if len(body) % 2 else b"")


def tone(freq: float, rate: int, seconds: float, amp: float = 0.5) -> np.ndarray:
    t = np.arange(int(rate * seconds)) / rate
    return amp * np.sin(2 * np.pi * freq * t)


def tone_wav(freq: float = 440.0, rate: int = 16000, seconds: float = 1.0,
             amp: float = 0.5, channels: int = 1) -> bytes:
    samples = tone(freq, rate, seconds, amp)
    return build_wav(pcm16_payload(samples, channels),
                     fmt=fmt_chunk(channels=channels, rate=rate))


def separable_pairs(n: int, dim: int, num_classes: int, noise: float = 0.1,
                    seed: int = 0, backend_id: str = "deterministic_test") -> list:
    """Synthetic (Embedding, label) pairs clustered around distant prototypes."""
    rng = np.random.default_rng(seed)
    protos = rng.standard_normal((num_classes, dim)) * 3.0
    pairs = []
    for i in range(n):
        label = i % num_classes
        vec = protos[label] + noise * rng.standard_normal(dim)
        marker = np.frombuffer(np.int64(i).tobytes() + bytes(24), dtype=np.uint8).tobytes()
        pairs.append((Embedding(values=vec.astype(np.float32), backend_id=backend_id,
                                source_hash=marker), label))
    return pairs

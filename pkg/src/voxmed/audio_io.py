"""RIFF/WAVE decoding and canonical-format conversion (mono, 16 kHz).

Accepted encodings: uncompressed PCM at 16/24/32 bits per sample and IEEE
float32, in canonical or WAVEFORMATEXTENSIBLE headers. Chunks other than
``fmt `` and ``data`` are skipped. Everything else raises a typed error;
``parse_wav`` never lets a decoding problem escape as an untyped crash.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRate, MalformedHeader, TruncatedData, UnsupportedEncoding

TARGET_RATE = 16000
MAX_DURATION_S = 120.0

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Windowed-sinc interpolation filter: Kaiser window, 32 taps per side.
_KAISER_BETA = 8.6
FILTER_HALF_WIDTH = 32


@dataclass
class AudioClip:
    """Decoded PCM audio: one row of ``samples`` per channel, in [-1, 1]."""

    samples: np.ndarray  # shape (channels, frames), float64
    sample_rate: int

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if self.sample_rate <= 0:
            raise InvalidRate(f"sample rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")
        if self.samples.size and (self.samples.min() < -1.0 or self.samples.max() > 1.0):
            raise ValueError("samples must lie in [-1, 1]")

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def frames(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.frames / self.sample_rate


@dataclass
class _FmtChunk:
    format_tag: int
    channels: int
    sample_rate: int
    bits_per_sample: int
    block_align: int


def _parse_fmt(payload: bytes) -> _FmtChunk:
    if len(payload) < 16:
        raise MalformedHeader("fmt chunk shorter than 16 bytes")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from("<HHIIHH", payload, 0)
    if tag == _WAVE_FORMAT_EXTENSIBLE:
        # WAVEFORMATEXTENSIBLE: cbSize(2) validbits(2) mask(4) then a 16-byte
        # GUID whose leading u16 is the effective format tag.
        if len(payload) < 40:
            raise MalformedHeader("extensible fmt chunk shorter than 40 bytes")
        tag = struct.unpack_from("<H", payload, 24)[0]
    return _FmtChunk(tag, channels, rate, bits, block_align)


def _decode_data(fmt: _FmtChunk, payload: bytes) -> np.ndarray:
    """Return (channels, frames) float64 samples normalized by 2^(bits-1)."""
    if fmt.channels < 1 or fmt.channels > 64:
        raise MalformedHeader(f"invalid channel count {fmt.channels}")
    if fmt.sample_rate <= 0:
        raise MalformedHeader(f"invalid sample rate {fmt.sample_rate}")

    if fmt.format_tag == _WAVE_FORMAT_PCM:
        if fmt.bits_per_sample not in (16, 24, 32):
            raise UnsupportedEncoding(f"PCM with {fmt.bits_per_sample} bits per sample")
    elif fmt.format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if fmt.bits_per_sample != 32:
            raise UnsupportedEncoding(f"float with {fmt.bits_per_sample} bits per sample")
    else:
        raise UnsupportedEncoding(f"format tag 0x{fmt.format_tag:04X}")

    bytes_per_sample = fmt.bits_per_sample // 8
    frame_size = bytes_per_sample * fmt.channels
    n_frames = len(payload) // frame_size
    payload = payload[: n_frames * frame_size]

    if fmt.format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        flat = np.nan_to_num(flat, nan=0.0, posinf=1.0, neginf=-1.0)
        flat = np.clip(flat, -1.0, 1.0)
    elif fmt.bits_per_sample == 16:
        flat = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 2.0**15
    elif fmt.bits_per_sample == 32:
        flat = np.frombuffer(payload, dtype="<i4").astype(np.float64) / 2.0**31
    else:  # 24-bit packed
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        val = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        val = np.where(val >= 1 << 23, val - (1 << 24), val)
        flat = val.astype(np.float64) / 2.0**23

    return flat.reshape(n_frames, fmt.channels).T.copy()


def parse_wav(data: bytes) -> AudioClip:
    """Decode a complete RIFF/WAVE byte sequence into an AudioClip.

    Raises MalformedHeader, UnsupportedEncoding or TruncatedData; any other
    outcome on arbitrary input is a bug.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("parse_wav expects a byte sequence")
    data = bytes(data)
    if len(data) < 12:
        raise MalformedHeader("shorter than a RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader("missing RIFF/WAVE magic")

    fmt: _FmtChunk | None = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > len(data):
            raise TruncatedData(
                f"chunk {chunk_id!r} declares {size} bytes, {len(data) - body_start} available"
            )
        body = data[body_start : body_start + size]
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            if fmt is None:
                raise MalformedHeader("data chunk before fmt chunk")
            samples = _decode_data(fmt, body)
            return AudioClip(samples=samples, sample_rate=fmt.sample_rate)
        pos = body_start + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise MalformedHeader("no fmt chunk found")
    raise MalformedHeader("no data chunk found")


def to_mono(clip: AudioClip) -> AudioClip:
    """Mix down to one channel by per-frame arithmetic mean."""
    if clip.channels == 1:
        return clip
    mixed = clip.samples.mean(axis=0, keepdims=True)
    return AudioClip(samples=mixed, sample_rate=clip.sample_rate)


def _kaiser(u: np.ndarray) -> np.ndarray:
    """Kaiser window evaluated at normalized positions |u| <= 1."""
    inside = np.maximum(0.0, 1.0 - u * u)
    return np.i0(_KAISER_BETA * np.sqrt(inside)) / np.i0(_KAISER_BETA)


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited resampling of a mono clip via windowed-sinc interpolation.

    Output length is round(frames * target / source). Interpolation weights
    are normalized per output sample so a constant signal stays constant away
    from the clip edges.
    """
    if target_rate is None or target_rate != int(target_rate) or int(target_rate) <= 0:
        raise InvalidRate(f"target rate must be a positive integer, got {target_rate!r}")
    target_rate = int(target_rate)
    if clip.channels != 1:
        raise ValueError("resample expects a mono clip; call to_mono first")
    if target_rate == clip.sample_rate:
        return clip

    x = clip.samples[0]
    ratio = target_rate / clip.sample_rate
    n_out = int(round(x.size * ratio))
    if x.size == 0 or n_out == 0:
        return AudioClip(samples=np.zeros((1, n_out)), sample_rate=target_rate)

    cutoff = min(1.0, ratio)  # in units of the source Nyquist
    half = FILTER_HALF_WIDTH
    pad = half + 1
    xp = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    offsets = np.arange(-half + 1, half + 1)

    out = np.empty(n_out)
    block = 1 << 16
    for start in range(0, n_out, block):
        stop = min(start + block, n_out)
        t = np.arange(start, stop) / ratio  # position in source samples
        k0 = np.floor(t).astype(np.int64)
        delta = t[:, None] - (k0[:, None] + offsets[None, :])
        weights = cutoff * np.sinc(cutoff * delta) * _kaiser(delta / half)
        weights /= weights.sum(axis=1, keepdims=True)
        segments = xp[k0[:, None] + offsets[None, :] + pad]
        out[start:stop] = (segments * weights).sum(axis=1)

    np.clip(out, -1.0, 1.0, out=out)
    return AudioClip(samples=out[None, :], sample_rate=target_rate)

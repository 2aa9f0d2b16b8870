#!/usr/bin/env python3
"""Regenerate the bundled 12-file mini corpus under data/mini_corpus.

The corpus mirrors the real collection's conventions at toy scale: 12
recordings from 8 patients covering all 8 diagnosis labels, with per-cycle
annotation sidecars and a tab-separated diagnosis table. Content is
deterministic so the files can be committed and the generator re-run to
verify them.
"""

from __future__ import annotations

import hashlib
import struct
import sys
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "mini_corpus"

# filename -> (sample_rate, channels, seconds)
RECORDINGS = {
    "101_1b1_Al_sc_Meditron.wav": (4000, 1, 0.6),
    "101_1b2_Pr_sc_Meditron.wav": (4000, 1, 0.5),
    "102_1b1_Ar_sc_Litt3200.wav": (10000, 1, 0.5),
    "102_2b1_Tc_mc_LittC2SE.wav": (16000, 1, 0.4),
    "103_1b1_Pl_sc_Meditron.wav": (44100, 2, 0.4),
    "104_1b1_Al_sc_Litt3200.wav": (10000, 1, 0.5),
    "104_1b2_Ar_mc_AKGC417L.wav": (16000, 1, 0.5),
    "104_2b1_Pr_sc_Meditron.wav": (4000, 1, 0.6),
    "105_1b1_Tc_sc_Meditron.wav": (44100, 1, 0.4),
    "106_1b1_Pl_sc_LittC2SE.wav": (16000, 1, 0.5),
    "107_1b1_Ar_mc_AKGC417L.wav": (8000, 1, 0.5),
    "108_1b1_Al_sc_Litt3200.wav": (22050, 1, 0.4),
}

DIAGNOSES = {
    101: "URTI",
    102: "Healthy",
    103: "Asthma",
    104: "COPD",
    105: "LRTI",
    106: "Bronchiectasis",
    107: "Bronchiolitis",
    108: "Pneumonia",
}


def pcm16_wav(samples: np.ndarray, rate: int, channels: int) -> bytes:
    frames = (np.clip(samples, -1, 1) * 32767).astype("<i2")
    if channels == 2:
        frames = np.column_stack([frames, frames]).ravel()
    payload = frames.tobytes()
    block = 2 * channels
    fmt = struct.pack("<HHIIHH", 1, channels, rate, rate * block, block, 16)
    return (
        b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt) + 8 + len(payload)) + b"WAVE"
        + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        + b"data" + struct.pack("<I", len(payload)) + payload
    )


def synth(name: str, rate: int, seconds: float) -> np.ndarray:
    """Breath-like noise with a per-recording tone, seeded by filename."""
    seed = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "little")
    rng = np.random.default_rng(seed)
    n = int(rate * seconds)
    t = np.arange(n) / rate
    envelope = 0.4 + 0.3 * np.sin(2 * np.pi * t / seconds)
    noise = rng.standard_normal(n)
    # crude low-pass to keep energy below ~1 kHz, like chest sounds
    kernel = np.ones(max(3, rate // 1000)) / max(3, rate // 1000)
    noise = np.convolve(noise, kernel, mode="same")
    tone = 0.2 * np.sin(2 * np.pi * (150 + seed % 400) * t)
    x = envelope * (0.5 * noise + tone)
    peak = np.max(np.abs(x))
    return 0.8 * x / peak if peak > 0 else x


def cycle_rows(seconds: float, seed: int) -> str:
    rng = np.random.default_rng(seed)
    half = seconds / 2
    rows = [
        f"0.000\t{half:.3f}\t{int(rng.integers(0, 2))}\t{int(rng.integers(0, 2))}",
        f"{half:.3f}\t{seconds:.3f}\t{int(rng.integers(0, 2))}\t{int(rng.integers(0, 2))}",
    ]
    return "\n".join(rows) + "\n"


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, (rate, channels, seconds) in RECORDINGS.items():
        samples = synth(name, rate, seconds)
        (OUT_DIR / name).write_bytes(pcm16_wav(samples, rate, channels))
        seed = int.from_bytes(hashlib.sha256(name.encode()).digest()[4:8], "little")
        (OUT_DIR / name.replace(".wav", ".txt")).write_text(cycle_rows(seconds, seed))
    table = "\n".join(f"{pid}\t{diag}" for pid, diag in sorted(DIAGNOSES.items())) + "\n"
    (OUT_DIR / "diagnoses.csv").write_text(table)
    print(f"wrote {len(RECORDINGS)} recordings to {OUT_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

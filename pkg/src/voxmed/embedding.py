"""Fixed-length recording embeddings through pluggable backends.

Three backend kinds:

* ``deterministic_test`` — hash-seeded pseudo-random vectors, no model file;
  the workhorse for tests and offline pipelines.
* ``cache`` — precomputed embeddings from an archive file or a cache
  directory; raises on a miss instead of computing.
* ``external_model`` — a TorchScript module mapping (1, frames, mels)
  features to (1, tokens, D) token sequences; torch is imported lazily.

Embedding archive (little-endian): magic ``VXEM``, version u16, D u32,
record count u64, then records of (32-byte content hash, D float32).
A cache directory holds one ``<hex-hash>.vxem`` file per recording with a
single record in the same layout.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsp import FeatureMatrix
from .errors import (
    BackendFailure,
    CacheMiss,
    DimMismatch,
    FormatError,
    ModelFileMissing,
    ShapeMismatch,
)

ARCHIVE_MAGIC = b"VXEM"
ARCHIVE_VERSION = 1
HASH_BYTES = 32

DEFAULT_EMBEDDING_DIM = 768

_DETERMINISTIC_SALT = b"voxmed-deterministic-v1"


def source_hash(raw: bytes) -> bytes:
    """Content hash of the originating audio bytes (sha256, 32 bytes)."""
    return hashlib.sha256(raw).digest()


@dataclass
class Embedding:
    values: np.ndarray  # (D,) float32
    backend_id: str
    source_hash: bytes

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32).reshape(-1)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding values must be finite")

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "deterministic_test"  # deterministic_test | cache | external_model
    model_path: str | None = None
    embedding_dim: int = DEFAULT_EMBEDDING_DIM
    aggregation: str = "mean_pool"  # mean_pool | first_token
    n_mels: int = 128
    cache_dir: str | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in ("deterministic_test", "cache", "external_model"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.aggregation not in ("mean_pool", "first_token"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")
        if self.kind in ("cache", "external_model") and not self.model_path:
            raise ValueError(f"{self.kind} backend requires model_path")


class Backend:
    """Immutable embedding backend handle; safe to share across threads."""

    def __init__(self, cfg: BackendConfig, backend_id: str):
        self.cfg = cfg
        self.id = backend_id
        self.dim = cfg.embedding_dim

    def chunk_vector(self, chunk: FeatureMatrix, src_hash: bytes) -> np.ndarray:
        raise NotImplementedError

    # Optional cache layer over computed embeddings.
    def cache_lookup(self, src_hash: bytes) -> np.ndarray | None:
        if self.cfg.cache_dir is None:
            return None
        path = Path(self.cfg.cache_dir) / f"{src_hash.hex()}.vxem"
        if not path.exists():
            return None
        return _read_cache_record(path, src_hash, self.dim)

    def cache_store(self, src_hash: bytes, values: np.ndarray) -> None:
        if self.cfg.cache_dir is None:
            return
        _write_cache_record(Path(self.cfg.cache_dir), src_hash, values)


class DeterministicTestBackend(Backend):
    """Per-chunk pseudo-random vector seeded by the content hash.

    Identical audio (and identical feature config) reproduces identical
    vectors; unrelated recordings give near-orthogonal ones.
    """

    def chunk_vector(self, chunk: FeatureMatrix, src_hash: bytes) -> np.ndarray:
        chunk_digest = hashlib.sha256(np.ascontiguousarray(chunk.values).tobytes()).digest()
        seed_bytes = hashlib.sha256(_DETERMINISTIC_SALT + src_hash + chunk_digest).digest()
        rng = np.random.default_rng(int.from_bytes(seed_bytes, "little"))
        return rng.standard_normal(self.dim)


class CacheBackend(Backend):
    """Serves embeddings from an archive file or a cache directory; never computes."""

    def __init__(self, cfg: BackendConfig, backend_id: str):
        super().__init__(cfg, backend_id)
        path = Path(cfg.model_path)
        self._dir: Path | None = None
        self._table: dict[bytes, np.ndarray] = {}
        if path.is_dir():
            self._dir = path
        else:
            archive = import_embedding_file(path, expected_dim=cfg.embedding_dim)
            self._table = {h: e.values for h, e in archive.items()}

    def cache_lookup(self, src_hash: bytes) -> np.ndarray | None:
        if self._dir is not None:
            path = self._dir / f"{src_hash.hex()}.vxem"
            if not path.exists():
                return None
            return _read_cache_record(path, src_hash, self.dim)
        vec = self._table.get(src_hash)
        return None if vec is None else vec.copy()

    def chunk_vector(self, chunk: FeatureMatrix, src_hash: bytes) -> np.ndarray:
        raise CacheMiss(f"no cached embedding for {src_hash.hex()[:12]}... in {self.cfg.model_path}")


class ExternalModelBackend(Backend):
    """TorchScript module executed per chunk; tokens reduced by the configured aggregation."""

    def __init__(self, cfg: BackendConfig, backend_id: str):
        super().__init__(cfg, backend_id)
        try:
            import torch
        except ImportError as exc:  # pragma: no cover - torch optional
            raise BackendFailure(f"external_model backend requires torch: {exc}")
        self._torch = torch
        try:
            self._module = torch.jit.load(cfg.model_path, map_location="cpu")
            self._module.eval()
        except Exception as exc:
            raise ShapeMismatch(f"cannot load TorchScript model {cfg.model_path}: {exc}")
        self._validate()

    def _validate(self):
        torch = self._torch
        probe = torch.zeros((1, 16, self.cfg.n_mels), dtype=torch.float32)
        try:
            with torch.no_grad():
                out = self._module(probe)
        except Exception as exc:
            raise ShapeMismatch(
                f"model rejects (1, frames, {self.cfg.n_mels}) input: {exc}"
            )
        shape = tuple(out.shape)
        if shape[-1] != self.dim or len(shape) not in (2, 3):
            raise ShapeMismatch(
                f"model produces shape {shape}, expected (..., tokens, {self.dim})"
            )

    def chunk_vector(self, chunk: FeatureMatrix, src_hash: bytes) -> np.ndarray:
        torch = self._torch
        feats = torch.from_numpy(np.asarray(chunk.values, dtype=np.float32)[None, :, :])
        try:
            with torch.no_grad():
                out = self._module(feats)
        except Exception as exc:
            raise BackendFailure(f"backend {self.id} failed: {exc}")
        tokens = out.detach().cpu().numpy().astype(np.float64)
        tokens = tokens.reshape(-1, tokens.shape[-1])
        if tokens.shape[-1] != self.dim:
            raise BackendFailure(f"backend {self.id} returned dim {tokens.shape[-1]}")
        if self.cfg.aggregation == "first_token":
            return tokens[0]
        return tokens.mean(axis=0)


def load_backend(cfg: BackendConfig) -> Backend:
    """Build and eagerly validate a backend handle."""
    if cfg.kind == "deterministic_test":
        return DeterministicTestBackend(cfg, cfg.name or "deterministic_test")
    if cfg.model_path is None or not Path(cfg.model_path).exists():
        raise ModelFileMissing(f"backend {cfg.kind} needs an existing model_path, got {cfg.model_path!r}")
    if cfg.kind == "cache":
        return CacheBackend(cfg, cfg.name or f"cache:{Path(cfg.model_path).stem}")
    return ExternalModelBackend(cfg, cfg.name or f"external:{Path(cfg.model_path).stem}")


def embed_recording(backend: Backend, chunks: list[FeatureMatrix], src_hash: bytes) -> list[Embedding]:
    """Per-chunk embeddings for one recording; a cached recording yields one entry.

    The recording-level mean is written to the backend cache when one is
    configured, so repeat calls are byte-identical reads.
    """
    cached = backend.cache_lookup(src_hash)
    if cached is not None:
        return [Embedding(values=cached, backend_id=backend.id, source_hash=src_hash)]
    if not chunks:
        raise BackendFailure("cannot embed a recording with no feature chunks")
    vectors = [np.asarray(backend.chunk_vector(c, src_hash), dtype=np.float64) for c in chunks]
    for v in vectors:
        if v.shape != (backend.dim,):
            raise BackendFailure(f"backend {backend.id} produced shape {v.shape}")
    out = [Embedding(values=v.astype(np.float32), backend_id=backend.id, source_hash=src_hash)
           for v in vectors]
    backend.cache_store(src_hash, _mean_values(out))
    return out


def _mean_values(embeddings: list[Embedding]) -> np.ndarray:
    """Mean of per-chunk float32 vectors; shared by embed() and the cache writer.

    Accumulating in float64 over the already-cast float32 values keeps a cache
    hit bit-identical to the value a fresh computation returns.
    """
    if len(embeddings) == 1:
        return embeddings[0].values
    mean = np.mean([e.values.astype(np.float64) for e in embeddings], axis=0)
    return mean.astype(np.float32)


def embed(backend: Backend, chunks: list[FeatureMatrix], src_hash: bytes) -> Embedding:
    """Single recording-level embedding: element-wise mean over chunk embeddings."""
    per_chunk = embed_recording(backend, chunks, src_hash)
    if len(per_chunk) == 1:
        return per_chunk[0]
    return Embedding(values=_mean_values(per_chunk), backend_id=backend.id, source_hash=src_hash)


# --- archive and cache records ---

def write_embedding_archive(path: str | Path, embeddings: dict[bytes, np.ndarray] | dict[bytes, Embedding]) -> None:
    """Write hash -> vector mappings in the VXEM archive layout (atomic)."""
    items = []
    dim = None
    for h, v in embeddings.items():
        vec = v.values if isinstance(v, Embedding) else np.asarray(v, dtype=np.float32)
        vec = np.asarray(vec, dtype=np.float32).reshape(-1)
        if len(h) != HASH_BYTES:
            raise ValueError(f"source hash must be {HASH_BYTES} bytes")
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise DimMismatch(f"mixed dims in archive: {vec.size} vs {dim}")
        items.append((h, vec))
    if dim is None:
        raise ValueError("cannot write an empty archive")

    path = Path(path)
    blob = bytearray()
    blob += ARCHIVE_MAGIC
    blob += struct.pack("<HIQ", ARCHIVE_VERSION, dim, len(items))
    for h, vec in items:
        blob += h
        blob += vec.astype("<f4").tobytes()
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(bytes(blob))
    os.replace(tmp, path)


def import_embedding_file(path: str | Path, expected_dim: int | None = None) -> dict[bytes, Embedding]:
    """Load a VXEM archive into a source-hash keyed map."""
    path = Path(path)
    if not path.exists():
        raise ModelFileMissing(f"embedding archive {path} does not exist")
    data = path.read_bytes()
    if len(data) < 18 or data[:4] != ARCHIVE_MAGIC:
        raise FormatError(f"{path} is not a VXEM archive")
    version, dim, count = struct.unpack_from("<HIQ", data, 4)
    if version != ARCHIVE_VERSION:
        raise FormatError(f"unsupported archive version {version}")
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatch(f"archive stores D={dim}, configured D={expected_dim}")
    record_size = HASH_BYTES + 4 * dim
    need = 18 + count * record_size
    if len(data) < need:
        raise FormatError(f"archive truncated: {len(data)} bytes, {need} required")

    backend_id = f"cache:{path.stem}"
    out: dict[bytes, Embedding] = {}
    pos = 18
    for _ in range(count):
        h = data[pos : pos + HASH_BYTES]
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=pos + HASH_BYTES).copy()
        out[h] = Embedding(values=vec, backend_id=backend_id, source_hash=h)
        pos += record_size
    return out


def _write_cache_record(cache_dir: Path, src_hash: bytes, values: np.ndarray) -> None:
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"{src_hash.hex()}.vxem"
    payload = src_hash + np.asarray(values, dtype="<f4").tobytes()
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(payload)
    os.replace(tmp, path)  # atomic: concurrent writers cannot interleave


def _read_cache_record(path: Path, src_hash: bytes, dim: int) -> np.ndarray:
    data = path.read_bytes()
    if len(data) < HASH_BYTES or data[:HASH_BYTES] != src_hash:
        raise FormatError(f"cache entry {path} does not match its hash")
    stored_dim = (len(data) - HASH_BYTES) // 4
    if stored_dim != dim or len(data) != HASH_BYTES + 4 * dim:
        raise DimMismatch(f"cache entry {path} stores D={stored_dim}, configured D={dim}")
    return np.frombuffer(data, dtype="<f4", offset=HASH_BYTES).copy()

"""1-D CNN over embedding vectors: valid cross-correlation stacks with ReLU,
max-pooling after every conv layer except the first, dropout before the dense
softmax head.

ModelParams keeps tensors in float32 (the serialized form); forward and the
training cores compute in float64 unless asked otherwise. Model file layout
(little-endian): magic ``VXMD``, version u16, u32-length-prefixed JSON arch
descriptor, then tensors in declaration order as (rank u8, dims u32 each,
float32 payload).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import Embedding
from .errors import (
    DimMismatch,
    EmptyInput,
    FormatError,
    InvalidArch,
    ModelFileMissing,
    VersionMismatch,
)

MODEL_MAGIC = b"VXMD"
MODEL_VERSION = 1

DEFAULT_CONV_LAYERS = ((256, 3), (128, 3), (64, 3))


@dataclass(frozen=True)
class ArchSpec:
    input_dim: int = 768
    conv_layers: tuple = DEFAULT_CONV_LAYERS
    pool_size: int = 2
    dropout_rate: float = 0.3
    num_classes: int = 3

    def __post_init__(self):
        object.__setattr__(self, "conv_layers", tuple(tuple(map(int, c)) for c in self.conv_layers))
        if self.num_classes < 2:
            raise InvalidArch("need at least two classes")
        if not self.conv_layers:
            raise InvalidArch("need at least one conv layer")
        if not 0 <= self.dropout_rate < 1:
            raise InvalidArch("dropout_rate must be in [0, 1)")
        if self.pool_size < 1:
            raise InvalidArch("pool_size must be >= 1")
        self.layer_lengths()  # validates no shape underflow

    def layer_lengths(self) -> list[int]:
        """Sequence length after each conv (and its pooling); raises InvalidArch on underflow."""
        lengths = []
        length = self.input_dim
        for i, (filters, kernel) in enumerate(self.conv_layers):
            if filters < 1 or kernel < 1:
                raise InvalidArch(f"conv layer {i} has invalid shape ({filters}, {kernel})")
            if kernel > length:
                raise InvalidArch(f"kernel {kernel} exceeds sequence length {length} at layer {i}")
            length = length - kernel + 1
            if i > 0:
                length //= self.pool_size
                if length < 1:
                    raise InvalidArch(f"sequence pooled away at layer {i}")
            lengths.append(length)
        return lengths

    @property
    def flat_dim(self) -> int:
        return self.conv_layers[-1][0] * self.layer_lengths()[-1]

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "conv_layers": [list(c) for c in self.conv_layers],
            "pool_size": self.pool_size,
            "dropout_rate": self.dropout_rate,
            "num_classes": self.num_classes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchSpec":
        return cls(
            input_dim=int(d["input_dim"]),
            conv_layers=tuple(tuple(c) for c in d["conv_layers"]),
            pool_size=int(d["pool_size"]),
            dropout_rate=float(d["dropout_rate"]),
            num_classes=int(d["num_classes"]),
        )


def param_order(arch: ArchSpec) -> list[str]:
    names = []
    for i in range(len(arch.conv_layers)):
        names += [f"conv{i}.w", f"conv{i}.b"]
    names += ["dense.w", "dense.b"]
    return names


def param_shapes(arch: ArchSpec) -> dict[str, tuple]:
    shapes = {}
    c_in = 1
    for i, (filters, kernel) in enumerate(arch.conv_layers):
        shapes[f"conv{i}.w"] = (filters, c_in, kernel)
        shapes[f"conv{i}.b"] = (filters,)
        c_in = filters
    shapes["dense.w"] = (arch.num_classes, arch.flat_dim)
    shapes["dense.b"] = (arch.num_classes,)
    return shapes


@dataclass
class ModelParams:
    arch: ArchSpec
    tensors: dict  # name -> float32 ndarray
    version: int = MODEL_VERSION

    def __post_init__(self):
        expected = param_shapes(self.arch)
        for name, shape in expected.items():
            if name not in self.tensors:
                raise FormatError(f"missing tensor {name}")
            t = np.asarray(self.tensors[name], dtype=np.float32)
            if t.shape != shape:
                raise FormatError(f"tensor {name} has shape {t.shape}, expected {shape}")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"tensor {name} contains non-finite values")
            self.tensors[name] = t


@dataclass
class ClassProbabilities:
    probs: np.ndarray
    label_index: int

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)


def init_params(arch: ArchSpec, seed: int) -> ModelParams:
    """He-uniform weights, zero biases; bit-reproducible for a given seed."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in param_shapes(arch).items():
        if name.endswith(".b"):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = int(np.prod(shape[1:]))
            limit = np.sqrt(6.0 / fan_in)
            tensors[name] = rng.uniform(-limit, limit, size=shape).astype(np.float32)
    return ModelParams(arch=arch, tensors=tensors)


# --- forward/backward cores (dict-of-float64 tensors; shared with training) ---

def _conv1d(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid cross-correlation: x (B, C, L), w (O, C, K) -> (B, O, L-K+1)."""
    kernel = w.shape[2]
    win = np.lib.stride_tricks.sliding_window_view(x, kernel, axis=2)  # (B, C, Lo, K)
    cols = win.transpose(0, 2, 1, 3).reshape(x.shape[0], -1, w.shape[1] * kernel)
    out = cols @ w.reshape(w.shape[0], -1).T + b
    return out.transpose(0, 2, 1)


def _maxpool(x: np.ndarray, pool: int):
    """x (B, C, L) -> pooled (B, C, L // pool) plus argmax offsets for backprop."""
    n_win = x.shape[2] // pool
    windows = x[:, :, : n_win * pool].reshape(x.shape[0], x.shape[1], n_win, pool)
    idx = windows.argmax(axis=3)
    pooled = np.take_along_axis(windows, idx[..., None], axis=3)[..., 0]
    return pooled, idx


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def dropout_mask(arch: ArchSpec, batch: int, seed: int, dtype=np.float64) -> np.ndarray | None:
    """Inverted-scaling dropout mask on the flattened activation, or None for rate 0."""
    if arch.dropout_rate == 0:
        return None
    rng = np.random.default_rng(seed)
    keep = rng.uniform(size=(batch, arch.flat_dim)) >= arch.dropout_rate
    return keep.astype(dtype) / (1.0 - arch.dropout_rate)


def forward_batch(tensors: dict, arch: ArchSpec, x: np.ndarray,
                  train_mode: bool = False, dropout_seed: int | None = None,
                  keep_cache: bool = False):
    """Run the stack on x (B, input_dim); returns (probs (B, K), cache)."""
    h = np.asarray(x)[:, None, :]
    cache = {"inputs": [], "pre": [], "pool_idx": [], "pool_in_len": []} if keep_cache else None

    for i in range(len(arch.conv_layers)):
        w = tensors[f"conv{i}.w"]
        b = tensors[f"conv{i}.b"]
        if keep_cache:
            cache["inputs"].append(h)
        pre = _conv1d(h, w, b)
        if keep_cache:
            cache["pre"].append(pre)
        h = np.maximum(pre, 0.0)
        if i > 0:
            if keep_cache:
                cache["pool_in_len"].append(h.shape[2])
            h, idx = _maxpool(h, arch.pool_size)
            if keep_cache:
                cache["pool_idx"].append(idx)

    flat = h.reshape(h.shape[0], -1)
    mask = None
    if train_mode and arch.dropout_rate > 0:
        if dropout_seed is None:
            raise ValueError("training-mode dropout requires a caller-supplied seed")
        mask = dropout_mask(arch, flat.shape[0], dropout_seed, dtype=flat.dtype)
        flat = flat * mask
    if keep_cache:
        cache["flat"] = flat
        cache["mask"] = mask

    logits = flat @ tensors["dense.w"].T + tensors["dense.b"]
    probs = _softmax(logits)
    if keep_cache:
        cache["probs"] = probs
    return probs, cache


def _tensors_f64(params: ModelParams) -> dict:
    return {k: v.astype(np.float64) for k, v in params.tensors.items()}


def forward(params: ModelParams, e: Embedding, train_mode: bool = False,
            seed: int | None = None) -> ClassProbabilities:
    """Class probabilities for one embedding; eval mode is bit-deterministic."""
    vec = np.asarray(e.values, dtype=np.float64)
    if vec.size != params.arch.input_dim:
        raise DimMismatch(f"embedding has dim {vec.size}, model expects {params.arch.input_dim}")
    probs, _ = forward_batch(_tensors_f64(params), params.arch, vec[None, :],
                             train_mode=train_mode, dropout_seed=seed)
    p = probs[0]
    return ClassProbabilities(probs=p, label_index=int(np.argmax(p)))


def predict_recording(params: ModelParams, chunk_embeddings: list[Embedding]) -> ClassProbabilities:
    """Mean of per-chunk probability vectors, renormalized; ties break low."""
    if not chunk_embeddings:
        raise EmptyInput("predict_recording needs at least one chunk embedding")
    probs = np.mean([forward(params, e).probs for e in chunk_embeddings], axis=0)
    probs = probs / probs.sum()
    return ClassProbabilities(probs=probs, label_index=int(np.argmax(probs)))


# --- serialization ---

def save_params(params: ModelParams, path: str | Path) -> None:
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<H", params.version)
    arch_json = json.dumps(params.arch.to_dict(), sort_keys=True).encode()
    blob += struct.pack("<I", len(arch_json))
    blob += arch_json
    for name in param_order(params.arch):
        t = np.ascontiguousarray(params.tensors[name], dtype="<f4")
        blob += struct.pack("<B", t.ndim)
        for d in t.shape:
            blob += struct.pack("<I", d)
        blob += t.tobytes()
    Path(path).write_bytes(bytes(blob))


def load_params(path: str | Path) -> ModelParams:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise ModelFileMissing(f"no model file at {path}")
    if len(data) < 10 or data[:4] != MODEL_MAGIC:
        raise FormatError(f"{path} is not a VXMD model file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != MODEL_VERSION:
        raise VersionMismatch(f"model file version {version}, supported {MODEL_VERSION}")
    (arch_len,) = struct.unpack_from("<I", data, 6)
    pos = 10
    if pos + arch_len > len(data):
        raise FormatError("model file truncated in arch descriptor")
    try:
        arch = ArchSpec.from_dict(json.loads(data[pos : pos + arch_len].decode()))
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise FormatError(f"bad arch descriptor: {exc}")
    pos += arch_len

    tensors = {}
    for name in param_order(arch):
        if pos + 1 > len(data):
            raise FormatError(f"model file truncated before tensor {name}")
        rank = data[pos]
        pos += 1
        if pos + 4 * rank > len(data):
            raise FormatError(f"model file truncated in dims of {name}")
        dims = struct.unpack_from(f"<{rank}I", data, pos)
        pos += 4 * rank
        count = int(np.prod(dims)) if dims else 1
        if pos + 4 * count > len(data):
            raise FormatError(f"model file truncated in payload of {name}")
        tensors[name] = np.frombuffer(data, dtype="<f4", count=count, offset=pos).reshape(dims).copy()
        pos += 4 * count
    return ModelParams(arch=arch, tensors=tensors, version=version)

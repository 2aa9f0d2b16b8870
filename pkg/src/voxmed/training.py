"""From-scratch supervised training for the classifier.

Backpropagation is exact for the whole stack (conv / ReLU / maxpool /
dropout / dense / softmax with fused cross-entropy), optimized with
bias-corrected Adam. Master weights stay in float64 for reproducibility and
gradient checking; float32 arithmetic is available through TrainConfig.dtype.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from .classifier import (
    ArchSpec,
    ClassProbabilities,
    ModelParams,
    forward_batch,
    init_params,
)
from .errors import DegenerateDataset, EmptyInput, ShapeMismatch

PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    early_stop_patience: int = 10
    seed: int = 0
    split_ratio: float = 0.8
    stratified: bool = True
    dtype: str = "float64"  # float32 for faster full runs

    def __post_init__(self):
        if not 0 < self.split_ratio < 1:
            raise ValueError("split_ratio must be in (0, 1)")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def zeros_like(cls, tensors: dict) -> "AdamState":
        return cls(
            m={k: np.zeros_like(np.asarray(v)) for k, v in tensors.items()},
            v={k: np.zeros_like(np.asarray(v)) for k, v in tensors.items()},
            t=0,
        )


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def to_csv(self, path) -> None:
        lines = ["epoch,train_loss,train_acc,val_loss,val_acc,seconds"]
        for i in range(self.epochs):
            lines.append(
                f"{i + 1},{self.train_loss[i]:.6f},{self.train_acc[i]:.6f},"
                f"{self.val_loss[i]:.6f},{self.val_acc[i]:.6f},{self.seconds[i]:.3f}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def derive_seed(base: int, *labels) -> int:
    """Stable per-subsystem seed derived from one master seed."""
    text = f"{base}|" + "|".join(str(x) for x in labels)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def _as_prob_matrix(probs) -> np.ndarray:
    if isinstance(probs, np.ndarray):
        return np.atleast_2d(np.asarray(probs, dtype=np.float64))
    rows = [p.probs if isinstance(p, ClassProbabilities) else np.asarray(p) for p in probs]
    return np.atleast_2d(np.asarray(rows, dtype=np.float64))


def cross_entropy(probs, onehot) -> float:
    """Mean over the batch of -ln(probability of the true class), clamped at 1e-12."""
    p = _as_prob_matrix(probs)
    y = np.atleast_2d(np.asarray(onehot, dtype=np.float64))
    if p.shape != y.shape:
        raise ShapeMismatch(f"probs shape {p.shape} vs labels shape {y.shape}")
    true_p = (p * y).sum(axis=1)
    return float(np.mean(-np.log(np.maximum(true_p, PROB_CLAMP))))


def onehot_labels(labels, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.size, num_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


# --- exact gradients ---

def _conv1d_backward(x: np.ndarray, w: np.ndarray, dout: np.ndarray):
    """Gradients of a valid cross-correlation; x (B,C,L), w (O,C,K), dout (B,O,Lo)."""
    n_batch, c_in, _ = x.shape
    out_ch, _, kernel = w.shape
    out_len = dout.shape[2]

    win = np.lib.stride_tricks.sliding_window_view(x, kernel, axis=2)  # (B, C, Lo, K)
    cols = win.transpose(0, 2, 1, 3).reshape(n_batch * out_len, c_in * kernel)
    dout_rows = dout.transpose(1, 0, 2).reshape(out_ch, n_batch * out_len)

    dw = (dout_rows @ cols).reshape(out_ch, c_in, kernel)
    db = dout.sum(axis=(0, 2))

    dcols = (dout_rows.T @ w.reshape(out_ch, -1)).reshape(n_batch, out_len, c_in, kernel)
    dx = np.zeros_like(x)
    for k in range(kernel):
        dx[:, :, k : k + out_len] += dcols[:, :, :, k].transpose(0, 2, 1)
    return dw, db, dx


def _unpool(d: np.ndarray, idx: np.ndarray, pool: int, in_len: int) -> np.ndarray:
    """Route pooled gradients back to the argmax positions."""
    n_batch, channels, n_win = d.shape
    out = np.zeros((n_batch, channels, in_len), dtype=d.dtype)
    windows = out[:, :, : n_win * pool].reshape(n_batch, channels, n_win, pool)
    np.put_along_axis(windows, idx[..., None], d[..., None], axis=3)
    return out


def backward_batch(tensors: dict, arch: ArchSpec, x: np.ndarray, onehot: np.ndarray,
                   train_mode: bool = False, dropout_seed: int | None = None):
    """Loss and exact parameter gradients for a batch; returns (loss, grads, probs)."""
    probs, cache = forward_batch(tensors, arch, x, train_mode=train_mode,
                                 dropout_seed=dropout_seed, keep_cache=True)
    n_batch = x.shape[0]
    loss = cross_entropy(probs, onehot)

    grads = {}
    dlogits = (probs - onehot) / n_batch  # fused softmax + cross-entropy
    grads["dense.w"] = dlogits.T @ cache["flat"]
    grads["dense.b"] = dlogits.sum(axis=0)
    dflat = dlogits @ tensors["dense.w"]
    if cache["mask"] is not None:
        dflat = dflat * cache["mask"]

    last_len = arch.layer_lengths()[-1]
    d = dflat.reshape(n_batch, arch.conv_layers[-1][0], last_len)

    n_conv = len(arch.conv_layers)
    for i in reversed(range(n_conv)):
        if i > 0:
            d = _unpool(d, cache["pool_idx"][i - 1], arch.pool_size, cache["pool_in_len"][i - 1])
        d = d * (cache["pre"][i] > 0)
        dw, db, dx = _conv1d_backward(cache["inputs"][i], np.asarray(tensors[f"conv{i}.w"]), d)
        grads[f"conv{i}.w"] = dw
        grads[f"conv{i}.b"] = db
        d = dx
    return loss, grads, probs


def backward(params: ModelParams, batch, dropout_seed: int | None = None,
             train_mode: bool = False) -> dict:
    """Gradient of mean cross-entropy over a batch of (Embedding, label) pairs."""
    if not batch:
        raise ShapeMismatch("backward needs a non-empty batch")
    x = np.asarray([np.asarray(e.values, dtype=np.float64) for e, _ in batch])
    if x.shape[1] != params.arch.input_dim:
        raise ShapeMismatch(f"embeddings have dim {x.shape[1]}, model expects {params.arch.input_dim}")
    y = onehot_labels([label for _, label in batch], params.arch.num_classes)
    tensors = {k: v.astype(np.float64) for k, v in params.tensors.items()}
    _, grads, _ = backward_batch(tensors, params.arch, x, y,
                                 train_mode=train_mode, dropout_seed=dropout_seed)
    return grads


def adam_step(tensors: dict, grads: dict, state: AdamState, cfg: TrainConfig):
    """One bias-corrected Adam update; returns (new_tensors, new_state)."""
    t = state.t + 1
    new_t, new_m, new_v = {}, {}, {}
    for name, theta in tensors.items():
        g = np.asarray(grads[name])
        if g.shape != np.asarray(theta).shape:
            raise ShapeMismatch(f"gradient {name} has shape {g.shape}, expected {np.asarray(theta).shape}")
        m = cfg.beta1 * state.m[name] + (1 - cfg.beta1) * g
        v = cfg.beta2 * state.v[name] + (1 - cfg.beta2) * g * g
        m_hat = m / (1 - cfg.beta1**t)
        v_hat = v / (1 - cfg.beta2**t)
        new_t[name] = theta - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        new_m[name] = m
        new_v[name] = v
    return new_t, AdamState(m=new_m, v=new_v, t=t)


# --- data splitting ---

def _largest_remainder(counts: list[int], ratio: float, total: int) -> list[int]:
    quotas = [ratio * c for c in counts]
    base = [int(np.floor(q)) for q in quotas]
    leftover = total - sum(base)
    order = sorted(range(len(counts)), key=lambda k: (-(quotas[k] - base[k]), k))
    take = list(base)
    i = 0
    while leftover > 0 and i < 2 * len(counts):
        k = order[i % len(counts)]
        if take[k] < counts[k]:
            take[k] += 1
            leftover -= 1
        i += 1
    return take


def split_dataset(items, ratio: float, seed: int, stratified: bool = True, group_key=None):
    """Deterministic (train, test) partition; stratified preserves class shares.

    ``group_key`` maps an item to a group id (for example the patient id);
    when given, whole groups land on one side so no group leaks across the
    split. Grouped splits target the ratio by item count and ignore
    ``stratified``.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    items = list(items)
    if not items:
        raise EmptyInput("cannot split an empty dataset")
    n = len(items)
    rng = np.random.default_rng(seed)
    n_train = int(np.floor(ratio * n + 0.5))

    if group_key is not None:
        groups: dict = {}
        for i, item in enumerate(items):
            groups.setdefault(group_key(item), []).append(i)
        keys = sorted(groups)
        order = rng.permutation(len(keys))
        chosen_list: list[int] = []
        for j in order:
            if len(chosen_list) >= n_train:
                break
            chosen_list.extend(groups[keys[j]])
        chosen_set = set(chosen_list)
        train = [items[i] for i in range(n) if i in chosen_set]
        test = [items[i] for i in range(n) if i not in chosen_set]
        return train, test

    if not stratified:
        perm = rng.permutation(n)
        chosen = np.sort(perm[:n_train])
    else:
        by_class: dict = {}
        for i, (_, label) in enumerate(items):
            by_class.setdefault(label, []).append(i)
        labels = sorted(by_class)
        counts = [len(by_class[c]) for c in labels]
        takes = _largest_remainder(counts, ratio, n_train)
        chosen_list: list[int] = []
        for label, take in zip(labels, takes):
            idx = np.array(by_class[label])
            perm = rng.permutation(idx.size)
            chosen_list.extend(idx[perm[:take]].tolist())
        chosen = np.sort(np.array(chosen_list, dtype=np.int64))

    chosen_set = set(int(i) for i in chosen)
    train = [items[i] for i in range(n) if i in chosen_set]
    test = [items[i] for i in range(n) if i not in chosen_set]
    return train, test


# --- training loop ---

def _eval_split(tensors: dict, arch: ArchSpec, x: np.ndarray, y: np.ndarray):
    probs, _ = forward_batch(tensors, arch, x)
    loss = cross_entropy(probs, y)
    acc = float(np.mean(probs.argmax(axis=1) == y.argmax(axis=1)))
    return loss, acc


def train(dataset, arch: ArchSpec, cfg: TrainConfig):
    """Mini-batch training with early stopping on validation loss.

    ``dataset`` is a list of (Embedding, label) pairs. The 20% split doubles
    as the validation set; the best-validation checkpoint is returned.
    """
    if not dataset:
        raise EmptyInput("cannot train on an empty dataset")
    labels = {label for _, label in dataset}
    if len(labels) < 2:
        raise DegenerateDataset("training requires at least two classes present")

    dtype = np.float64 if cfg.dtype == "float64" else np.float32
    train_items, val_items = split_dataset(dataset, cfg.split_ratio, derive_seed(cfg.seed, "split"),
                                           stratified=cfg.stratified)
    if not val_items:
        val_items = train_items

    def as_xy(pairs):
        x = np.asarray([np.asarray(e.values, dtype=dtype) for e, _ in pairs])
        y = onehot_labels([l for _, l in pairs], arch.num_classes).astype(dtype)
        return x, y

    x_train, y_train = as_xy(train_items)
    x_val, y_val = as_xy(val_items)

    tensors = {k: v.astype(dtype) for k, v in init_params(arch, derive_seed(cfg.seed, "init")).tensors.items()}
    state = AdamState.zeros_like(tensors)
    history = TrainHistory()

    best_tensors = {k: v.copy() for k, v in tensors.items()}
    best_val = np.inf
    stale = 0
    n = x_train.shape[0]

    for epoch in range(cfg.max_epochs):
        started = time.perf_counter()
        order = np.random.default_rng(derive_seed(cfg.seed, "shuffle", epoch)).permutation(n)
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            _, grads, _ = backward_batch(
                tensors, arch, x_train[idx], y_train[idx],
                train_mode=True, dropout_seed=derive_seed(cfg.seed, "dropout", epoch, b),
            )
            tensors, state = adam_step(tensors, grads, state, cfg)

        tr_loss, tr_acc = _eval_split(tensors, arch, x_train, y_train)
        va_loss, va_acc = _eval_split(tensors, arch, x_val, y_val)
        history.train_loss.append(tr_loss)
        history.train_acc.append(tr_acc)
        history.val_loss.append(va_loss)
        history.val_acc.append(va_acc)
        history.seconds.append(time.perf_counter() - started)

        if va_loss < best_val:
            best_val = va_loss
            best_tensors = {k: v.copy() for k, v in tensors.items()}
            stale = 0
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                break

    params = ModelParams(arch=arch, tensors={k: v.astype(np.float32) for k, v in best_tensors.items()})
    return params, history

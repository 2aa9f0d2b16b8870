"""Accuracy and F1 scoring plus the backend-by-scheme ablation grid.

Macro F1 follows the caption convention: unweighted mean of per-class F1
with zero-denominator classes scored 0, and classes absent from both truth
and prediction left out of the mean entirely. That exclusion rule is part
of the contract here, so the scores are computed by hand rather than
delegated to a metrics library.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifier import ArchSpec, ModelParams, predict_recording
from .dataset import LabelScheme, build_dataset
from .embedding import Backend, BackendConfig, Embedding, load_backend
from .errors import EmptyInput, EmptyMatrix, LabelOutOfRange, ShapeMismatch, VoxmedError
from .pipeline import chunk_embeddings, recording_embedding
from .training import TrainConfig, derive_seed, split_dataset, train


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K count grid; rows are true classes, columns predictions."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ShapeMismatch(f"confusion matrix must be square, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(true_labels, predicted_labels, num_classes: int) -> ConfusionMatrix:
    t = np.asarray(list(true_labels), dtype=np.int64)
    p = np.asarray(list(predicted_labels), dtype=np.int64)
    if t.shape != p.shape:
        raise ShapeMismatch(f"{t.size} true labels vs {p.size} predictions")
    if t.size and (t.min() < 0 or p.min() < 0 or t.max() >= num_classes or p.max() >= num_classes):
        raise LabelOutOfRange(f"labels must lie in [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("accuracy is undefined for an empty confusion matrix")
    return float(np.trace(cm.counts) / cm.total)


def per_class_scores(cm: ConfusionMatrix) -> list[dict]:
    """Precision, recall, F1 and support per class, frozen conventions."""
    scores = []
    for k in range(cm.num_classes):
        tp = int(cm.counts[k, k])
        pred_k = int(cm.counts[:, k].sum())
        true_k = int(cm.counts[k, :].sum())
        precision = tp / pred_k if pred_k else 0.0
        recall = tp / true_k if true_k else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores.append({"precision": precision, "recall": recall, "f1": f1,
                       "support": true_k, "predicted": pred_k})
    return scores


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean F1 over classes seen in truth or prediction."""
    if cm.total == 0:
        raise EmptyMatrix("macro F1 is undefined for an empty confusion matrix")
    scores = per_class_scores(cm)
    active = [s["f1"] for s in scores if s["support"] or s["predicted"]]
    return float(np.mean(active))


def weighted_f1(cm: ConfusionMatrix) -> float:
    """Support-weighted mean of per-class F1."""
    if cm.total == 0:
        raise EmptyMatrix("weighted F1 is undefined for an empty confusion matrix")
    scores = per_class_scores(cm)
    return float(sum(s["f1"] * s["support"] for s in scores) / cm.total)


@dataclass
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    macro_f1: float
    weighted_f1: float
    per_class: list
    scheme_name: str = ""
    backend_id: str = ""
    item_count: int = 0
    class_names: tuple = ()

    def to_text(self) -> str:
        lines = [
            f"scheme: {self.scheme_name}  backend: {self.backend_id}  items: {self.item_count}",
            f"accuracy: {self.accuracy:.4f}  macro F1: {self.macro_f1:.4f}  weighted F1: {self.weighted_f1:.4f}",
        ]
        names = self.class_names or tuple(str(k) for k in range(self.confusion.num_classes))
        for name, s in zip(names, self.per_class):
            lines.append(
                f"  {name}: precision {s['precision']:.4f}  recall {s['recall']:.4f}"
                f"  f1 {s['f1']:.4f}  support {s['support']}"
            )
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        names = self.class_names or tuple(str(k) for k in range(self.confusion.num_classes))
        lines = ["backend,scheme,class,precision,recall,f1,support"]
        lines.append(
            f"{self.backend_id},{self.scheme_name},__overall__,"
            f"{self.accuracy:.6f},{self.macro_f1:.6f},{self.weighted_f1:.6f},{self.item_count}"
        )
        for name, s in zip(names, self.per_class):
            lines.append(
                f"{self.backend_id},{self.scheme_name},{name},"
                f"{s['precision']:.6f},{s['recall']:.6f},{s['f1']:.6f},{s['support']}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def report_from_labels(true_labels, predicted_labels, num_classes: int,
                       scheme_name: str = "", backend_id: str = "",
                       class_names: tuple = ()) -> EvaluationReport:
    cm = confusion_matrix(true_labels, predicted_labels, num_classes)
    return EvaluationReport(
        confusion=cm,
        accuracy=accuracy(cm),
        macro_f1=macro_f1(cm),
        weighted_f1=weighted_f1(cm),
        per_class=per_class_scores(cm),
        scheme_name=scheme_name,
        backend_id=backend_id,
        item_count=cm.total,
        class_names=tuple(class_names),
    )


def _predict_item(params: ModelParams, item, backend: Backend | None):
    """One predicted label for either an Embedding or a RecordingMeta item."""
    if isinstance(item, Embedding):
        return predict_recording(params, [item]).label_index
    if backend is None:
        raise EmptyInput("a backend is required to evaluate raw recordings")
    data = Path(item.file_path).read_bytes()
    return predict_recording(params, chunk_embeddings(backend, data)).label_index


def evaluate(params: ModelParams, items, backend: Backend | None = None,
             scheme_name: str = "", class_names: tuple = ()) -> EvaluationReport:
    """Score a trained model on (Embedding | RecordingMeta, label) pairs."""
    items = list(items)
    if not items:
        raise EmptyInput("cannot evaluate an empty dataset slice")
    true_labels = [label for _, label in items]
    predicted = [_predict_item(params, obj, backend) for obj, _ in items]
    backend_id = backend.id if backend is not None else ""
    return report_from_labels(true_labels, predicted, params.arch.num_classes,
                              scheme_name=scheme_name, backend_id=backend_id,
                              class_names=class_names)


@dataclass
class AblationCell:
    backend_id: str
    scheme_name: str
    report: EvaluationReport | None = None
    error: str = ""


def _embed_dataset(backend: Backend, dataset) -> list:
    pairs = []
    for meta, label in dataset.items:
        data = Path(meta.file_path).read_bytes()
        pairs.append((recording_embedding(backend, data), label))
    return pairs


def run_ablation(backend_cfgs: list[BackendConfig], schemes: list[LabelScheme],
                 audio_dir, diagnosis_path, train_cfg: TrainConfig | None = None,
                 arch: ArchSpec | None = None) -> list[AblationCell]:
    """Train and score one model per (backend, scheme) cell.

    Every cell derives its own seed from the shared one, so cells are
    independent and the grid is reproducible run to run. Failures are
    captured in the cell instead of aborting the grid.
    """
    base_cfg = train_cfg or TrainConfig()
    base_arch = arch or ArchSpec()
    cells = []
    for backend_cfg in backend_cfgs:
        for scheme in schemes:
            backend_id = backend_cfg.name or backend_cfg.kind
            cell = AblationCell(backend_id=backend_id, scheme_name=scheme.name)
            try:
                backend = load_backend(backend_cfg)
                dataset = build_dataset(audio_dir, diagnosis_path, scheme)
                pairs = _embed_dataset(backend, dataset)
                cfg = replace(base_cfg, seed=derive_seed(base_cfg.seed, backend_id, scheme.name))
                cell_arch = replace(base_arch, input_dim=backend.dim,
                                    num_classes=scheme.num_classes)
                params, _ = train(pairs, cell_arch, cfg)
                _, test_pairs = split_dataset(pairs, cfg.split_ratio,
                                              derive_seed(cfg.seed, "split"),
                                              stratified=cfg.stratified)
                if not test_pairs:
                    test_pairs = pairs
                cell.report = evaluate(params, test_pairs, backend,
                                       scheme_name=scheme.name, class_names=scheme.classes)
                cell.report.backend_id = backend_id
            except VoxmedError as exc:
                cell.error = f"{exc.code}: {exc}"
            cells.append(cell)
    return cells


def ablation_grid_csv(cells: list[AblationCell]) -> str:
    """Table-shaped grid: one row per cell with accuracy and F1 columns."""
    lines = ["backend,scheme,accuracy,macro_f1,weighted_f1,items,error"]
    for cell in cells:
        if cell.report is not None:
            r = cell.report
            lines.append(
                f"{cell.backend_id},{cell.scheme_name},{r.accuracy:.6f},"
                f"{r.macro_f1:.6f},{r.weighted_f1:.6f},{r.item_count},"
            )
        else:
            lines.append(f"{cell.backend_id},{cell.scheme_name},,,,0,{cell.error}")
    return "\n".join(lines) + "\n"


def parse_ablation_grid_csv(text: str) -> list[dict]:
    """Inverse of ablation_grid_csv for round-trip checks and tooling."""
    rows = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    for line in lines[1:]:
        parts = line.split(",", 6)
        if len(parts) != 7:
            raise ShapeMismatch(f"bad grid row: {line!r}")
        backend, scheme, acc, mf1, wf1, items, error = parts
        rows.append({
            "backend": backend,
            "scheme": scheme,
            "accuracy": float(acc) if acc else None,
            "macro_f1": float(mf1) if mf1 else None,
            "weighted_f1": float(wf1) if wf1 else None,
            "items": int(items),
            "error": error,
        })
    return rows

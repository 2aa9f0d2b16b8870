"""Corpus ingestion for ICBHI-style respiratory sound collections.

A collection is a directory of WAV files named
``<patient>_<index>_<location>_<mode>_<equipment>.wav`` plus a diagnosis
table mapping patient ids to diagnosis strings. Label schemes group raw
diagnoses into the class lists used for training and evaluation; they are
shipped as JSON config files so new groupings need no code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import (
    BadFilename,
    BadPatientId,
    DuplicatePatient,
    EmptyDataset,
    FormatError,
    MissingDiagnosis,
    ParseError,
)

SCHEME_ALIASES = {
    "3class": "healthy_copd_others",
    "4class": "healthy_copd_urti_others",
    "5class": "healthy_copd_urti_lrti_bronchitis",
}


@dataclass(frozen=True)
class RecordingMeta:
    """Metadata parsed from one recording's filename.

    ``cycles`` holds optional per-cycle annotation rows
    (start_s, end_s, crackles, wheezes) from a sibling .txt file; they are
    side data only and never feed the classifier.
    """

    patient_id: int
    recording_index: str
    chest_location: str
    acquisition_mode: str
    equipment: str
    file_path: str = ""
    cycles: tuple = ()


@dataclass(frozen=True)
class LabelScheme:
    name: str
    classes: tuple
    diagnosis_map: dict
    catch_all: str | None = None

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("scheme classes must be distinct")
        if self.catch_all is not None and self.catch_all not in self.classes:
            raise ValueError(f"catch_all {self.catch_all!r} is not one of the classes")
        for diag, target in self.diagnosis_map.items():
            if target not in self.classes:
                raise ValueError(f"diagnosis {diag!r} maps to unknown class {target!r}")

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_index(self, class_name: str) -> int:
        return self.classes.index(class_name)


@dataclass
class LabeledDataset:
    items: list = field(default_factory=list)  # (RecordingMeta, class index)
    scheme: LabelScheme | None = None
    class_counts: list = field(default_factory=list)
    excluded_count: int = 0

    @property
    def patient_count(self) -> int:
        return len({meta.patient_id for meta, _ in self.items})

    def __len__(self) -> int:
        return len(self.items)


def parse_recording_filename(name: str) -> RecordingMeta:
    """Split a corpus filename into its five positional fields."""
    base = Path(name).name
    if not base.lower().endswith(".wav"):
        raise BadFilename(f"{base!r} does not end in .wav")
    stem = base[:-4]
    fields = stem.split("_")
    if len(fields) != 5 or any(not f for f in fields):
        raise BadFilename(f"{base!r} must have 5 underscore-separated fields")
    if not fields[0].isdigit():
        raise BadPatientId(f"patient field {fields[0]!r} is not numeric")
    patient_id = int(fields[0])
    if patient_id <= 0:
        raise BadPatientId(f"patient id must be positive, got {patient_id}")
    return RecordingMeta(
        patient_id=patient_id,
        recording_index=fields[1],
        chest_location=fields[2],
        acquisition_mode=fields[3],
        equipment=fields[4],
        file_path=str(name),
    )


def _parse_cycle_rows(text: str) -> tuple:
    """Best-effort parse of per-cycle annotation rows; bad rows are skipped."""
    cycles = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) < 4:
            continue
        try:
            cycles.append((float(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])))
        except ValueError:
            continue
    return tuple(cycles)


def load_diagnoses(path) -> dict:
    """Read a (patient_id, diagnosis) table, tab- or comma-separated."""
    table: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split(",")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ParseError(f"{path}:{lineno}: expected 'patient<sep>diagnosis', got {line!r}")
            try:
                patient_id = int(parts[0].strip())
            except ValueError:
                raise ParseError(f"{path}:{lineno}: patient id {parts[0]!r} is not an integer")
            if patient_id in table:
                raise DuplicatePatient(f"{path}:{lineno}: patient {patient_id} listed twice")
            table[patient_id] = parts[1].strip()
    return table


def apply_label_scheme(diagnosis: str, scheme: LabelScheme) -> int | None:
    """Class index for a diagnosis, or None when the scheme excludes it."""
    diagnosis = diagnosis.strip()
    if diagnosis in scheme.diagnosis_map:
        return scheme.class_index(scheme.diagnosis_map[diagnosis])
    if scheme.catch_all is not None:
        return scheme.class_index(scheme.catch_all)
    return None


def load_scheme(name_or_path) -> LabelScheme:
    """Load a scheme by bundled name, alias (3class/4class/5class), or file path."""
    key = str(name_or_path)
    key = SCHEME_ALIASES.get(key, key)
    candidate = Path(key)
    if candidate.suffix == ".json" and candidate.exists():
        text = candidate.read_text(encoding="utf-8")
    else:
        ref = resources.files("voxmed.schemes").joinpath(f"{key}.json")
        if not ref.is_file():
            raise FormatError(f"unknown label scheme {name_or_path!r}")
        text = ref.read_text(encoding="utf-8")
    try:
        cfg = json.loads(text)
        scheme = LabelScheme(
            name=cfg["name"],
            classes=tuple(cfg["classes"]),
            diagnosis_map=dict(cfg.get("map", {})),
            catch_all=cfg.get("catch_all"),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"bad scheme config {name_or_path!r}: {exc}")
    return scheme


def bundled_scheme_names() -> list:
    names = []
    for entry in resources.files("voxmed.schemes").iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name[:-5])
    return sorted(names)


def build_dataset(audio_dir, diagnosis_path, scheme: LabelScheme) -> LabeledDataset:
    """Assemble (RecordingMeta, class index) items for every labeled recording.

    Recordings whose diagnosis the scheme excludes are dropped and counted.
    Ordering is lexicographic by filename so builds are deterministic.
    """
    audio_dir = Path(audio_dir)
    wavs = sorted(p for p in audio_dir.iterdir() if p.name.lower().endswith(".wav")) \
        if audio_dir.is_dir() else []
    if not wavs:
        raise EmptyDataset(f"no .wav files under {audio_dir}")

    diagnoses = load_diagnoses(diagnosis_path)
    items = []
    counts = [0] * scheme.num_classes
    excluded = 0
    for path in wavs:
        meta = parse_recording_filename(str(path))
        annotation = path.with_suffix(".txt")
        if annotation.exists():
            cycles = _parse_cycle_rows(annotation.read_text(encoding="utf-8"))
            meta = RecordingMeta(**{**meta.__dict__, "cycles": cycles})
        if meta.patient_id not in diagnoses:
            raise MissingDiagnosis(f"patient {meta.patient_id} ({path.name}) has no diagnosis row")
        label = apply_label_scheme(diagnoses[meta.patient_id], scheme)
        if label is None:
            excluded += 1
            continue
        items.append((meta, label))
        counts[label] += 1
    return LabeledDataset(items=items, scheme=scheme, class_counts=counts, excluded_count=excluded)

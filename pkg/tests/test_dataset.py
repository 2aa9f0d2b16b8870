"""Corpus ingestion: filename/diagnosis parsing, label schemes, dataset builds."""

import json

import pytest

from voxmed.dataset import (
    LabelScheme,
    SCHEME_ALIASES,
    apply_label_scheme,
    build_dataset,
    bundled_scheme_names,
    load_diagnoses,
    load_scheme,
    parse_recording_filename,
)
from voxmed.errors import (
    BadFilename,
    BadPatientId,
    DuplicatePatient,
    EmptyDataset,
    FormatError,
    MissingDiagnosis,
    ParseError,
)


class TestFilenameParsing:
    def test_oracle(self):
        meta = parse_recording_filename("101_1b1_Al_sc_Meditron.wav")
        assert meta.patient_id == 101
        assert meta.recording_index == "1b1"
        assert meta.chest_location == "Al"
        assert meta.acquisition_mode == "sc"
        assert meta.equipment == "Meditron"

    def test_path_prefix_is_stripped(self):
        meta = parse_recording_filename("/some/dir/226_1b1_Pl_sc_LittC2SE.wav")
        assert meta.patient_id == 226
        assert meta.file_path == "/some/dir/226_1b1_Pl_sc_LittC2SE.wav"

    def test_uppercase_extension(self):
        assert parse_recording_filename("7_1b1_Al_sc_M.WAV").patient_id == 7

    @pytest.mark.parametrize("name", [
        "101_1b1_Al_sc_Meditron.mp3",
        "101_1b1_Al_sc.wav",                # 4 fields
        "101_1b1_Al_sc_Meditron_extra.wav",  # 6 fields
        "101_1b1__sc_Meditron.wav",          # empty field
        "nolabel.wav",
    ])
    def test_bad_filename(self, name):
        with pytest.raises(BadFilename):
            parse_recording_filename(name)

    @pytest.mark.parametrize("name", [
        "abc_1b1_Al_sc_Meditron.wav",
        "-4_1b1_Al_sc_Meditron.wav",
        "0_1b1_Al_sc_Meditron.wav",
    ])
    def test_bad_patient_id(self, name):
        with pytest.raises(BadPatientId):
            parse_recording_filename(name)


class TestDiagnosisTable:
    def test_tab_separated(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("101\tURTI\n104\tCOPD\n")
        assert load_diagnoses(path) == {101: "URTI", 104: "COPD"}

    def test_comma_separated(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("7,Healthy\n9,Asthma\n")
        assert load_diagnoses(path) == {7: "Healthy", 9: "Asthma"}

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("\n101\tURTI\n\n\n102\tHealthy\n")
        assert len(load_diagnoses(path)) == 2

    def test_whitespace_trimmed(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text(" 101 \t URTI \n")
        assert load_diagnoses(path) == {101: "URTI"}

    @pytest.mark.parametrize("body", [
        "101\n", "101\tURTI\textra\n", "x1\tURTI\n", "101\t\n",
    ])
    def test_parse_errors(self, tmp_path, body):
        path = tmp_path / "d.csv"
        path.write_text(body)
        with pytest.raises(ParseError):
            load_diagnoses(path)

    def test_duplicate_patient(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("101\tURTI\n101\tCOPD\n")
        with pytest.raises(DuplicatePatient):
            load_diagnoses(path)


class TestLabelScheme:
    def test_invariants(self):
        with pytest.raises(ValueError):
            LabelScheme(name="dup", classes=("A", "A"), diagnosis_map={})
        with pytest.raises(ValueError):
            LabelScheme(name="x", classes=("A",), diagnosis_map={}, catch_all="B")
        with pytest.raises(ValueError):
            LabelScheme(name="x", classes=("A",), diagnosis_map={"D": "B"})

    def test_class_index(self):
        scheme = LabelScheme(name="x", classes=("A", "B"), diagnosis_map={"D": "B"})
        assert scheme.class_index("B") == 1
        assert scheme.num_classes == 2


class TestApplyScheme:
    THREE = load_scheme("3class")
    FIVE = load_scheme("5class")

    def test_mapped_diagnoses(self):
        assert self.THREE.classes == ("Healthy", "COPD", "others")
        assert apply_label_scheme("Healthy", self.THREE) == 0
        assert apply_label_scheme("COPD", self.THREE) == 1

    def test_catch_all(self):
        assert apply_label_scheme("Asthma", self.THREE) == self.THREE.class_index("others")
        assert apply_label_scheme("NeverSeenBefore", self.THREE) == 2

    def test_five_class_merges_bronchial_diagnoses(self):
        idx = self.FIVE.class_index("Bronchitis")
        assert apply_label_scheme("Bronchiectasis", self.FIVE) == idx
        assert apply_label_scheme("Bronchiolitis", self.FIVE) == idx

    def test_five_class_excludes_unmapped(self):
        assert self.FIVE.catch_all is None
        assert apply_label_scheme("Pneumonia", self.FIVE) is None
        assert apply_label_scheme("Asthma", self.FIVE) is None

    def test_whitespace_tolerant(self):
        assert apply_label_scheme("  COPD  ", self.THREE) == 1


class TestLoadScheme:
    def test_aliases_cover_bundled_schemes(self):
        names = bundled_scheme_names()
        assert set(SCHEME_ALIASES.values()) <= set(names)
        for alias, full in SCHEME_ALIASES.items():
            assert load_scheme(alias).name == load_scheme(full).name

    def test_class_widths(self):
        assert load_scheme("3class").num_classes == 3
        assert load_scheme("4class").num_classes == 4
        assert load_scheme("5class").num_classes == 5

    def test_unknown_scheme(self):
        with pytest.raises(FormatError):
            load_scheme("no_such_scheme")

    def test_custom_file(self, tmp_path):
        path = tmp_path / "mine.json"
        path.write_text(json.dumps({
            "name": "mine", "classes": ["Sick", "Well"],
            "map": {"Healthy": "Well"}, "catch_all": "Sick",
        }))
        scheme = load_scheme(path)
        assert scheme.name == "mine"
        assert apply_label_scheme("Healthy", scheme) == 1
        assert apply_label_scheme("COPD", scheme) == 0

    @pytest.mark.parametrize("body", [
        "not json at all",
        json.dumps({"classes": ["A"]}),                          # missing name
        json.dumps({"name": "x", "classes": ["A", "A"], "map": {}}),  # dup classes
        json.dumps({"name": "x", "classes": ["A"], "map": {"D": "Z"}}),
    ])
    def test_bad_scheme_file(self, tmp_path, body):
        path = tmp_path / "bad.json"
        path.write_text(body)
        with pytest.raises(FormatError):
            load_scheme(path)


class TestBuildDataset:
    def test_three_class_counts(self, mini_corpus_dir, diagnoses_path):
        ds = build_dataset(mini_corpus_dir, diagnoses_path, load_scheme("3class"))
        assert len(ds) == 12
        assert ds.class_counts == [2, 3, 7]
        assert ds.excluded_count == 0
        assert ds.patient_count == 8

    def test_four_class_counts(self, mini_corpus_dir, diagnoses_path):
        ds = build_dataset(mini_corpus_dir, diagnoses_path, load_scheme("4class"))
        assert len(ds) == 12
        assert ds.class_counts == [2, 3, 2, 5]
        assert ds.excluded_count == 0

    def test_five_class_counts_and_exclusions(self, mini_corpus_dir, diagnoses_path):
        ds = build_dataset(mini_corpus_dir, diagnoses_path, load_scheme("5class"))
        assert len(ds) == 10
        assert ds.class_counts == [2, 3, 2, 1, 2]
        assert ds.excluded_count == 2  # Asthma + Pneumonia patients dropped

    def test_items_ordered_lexicographically(self, mini_corpus_dir, diagnoses_path):
        ds = build_dataset(mini_corpus_dir, diagnoses_path, load_scheme("3class"))
        names = [meta.file_path.rsplit("/", 1)[-1] for meta, _ in ds.items]
        assert names == sorted(names)

    def test_deterministic(self, mini_corpus_dir, diagnoses_path):
        scheme = load_scheme("3class")
        a = build_dataset(mini_corpus_dir, diagnoses_path, scheme)
        b = build_dataset(mini_corpus_dir, diagnoses_path, scheme)
        assert [(m.file_path, l) for m, l in a.items] == [(m.file_path, l) for m, l in b.items]

    def test_labels_round_trip_through_diagnoses(self, mini_corpus_dir, diagnoses_path):
        scheme = load_scheme("4class")
        diagnoses = load_diagnoses(diagnoses_path)
        ds = build_dataset(mini_corpus_dir, diagnoses_path, scheme)
        for meta, label in ds.items:
            assert apply_label_scheme(diagnoses[meta.patient_id], scheme) == label

    def test_counts_match_items(self, mini_corpus_dir, diagnoses_path):
        ds = build_dataset(mini_corpus_dir, diagnoses_path, load_scheme("5class"))
        for k, count in enumerate(ds.class_counts):
            assert count == sum(1 for _, label in ds.items if label == k)

    def test_cycle_annotations_attached(self, mini_corpus_dir, diagnoses_path):
        ds = build_dataset(mini_corpus_dir, diagnoses_path, load_scheme("3class"))
        metas = [meta for meta, _ in ds.items]
        assert all(meta.cycles for meta in metas)  # every wav ships a sibling .txt
        start, end, crackles, wheezes = metas[0].cycles[0]
        assert 0 <= start < end
        assert crackles in (0, 1) and wheezes in (0, 1)

    def test_empty_directory(self, tmp_path, diagnoses_path):
        with pytest.raises(EmptyDataset):
            build_dataset(tmp_path, diagnoses_path, load_scheme("3class"))

    def test_missing_diagnosis(self, tmp_path, mini_corpus_dir):
        truncated = tmp_path / "d.csv"
        truncated.write_text("101\tURTI\n")  # the other patients are absent
        with pytest.raises(MissingDiagnosis):
            build_dataset(mini_corpus_dir, truncated, load_scheme("3class"))

"""Data layer: value types, label rules, file formats, shipped fixtures."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tadbench.data import (
    DATASETS,
    DETECTOR_COLUMNS,
    EMBEDDING_ROW_LABELS,
    FIXTURE_NAMES,
    BenchmarkSplit,
    LabeledEmbeddingSet,
    PerformanceMatrix,
    TextRecord,
    assign_anomaly_labels,
    available_fixtures,
    load_all_fixtures,
    load_embedding_file,
    load_fixture,
    load_performance_matrix,
    save_embedding_file,
    save_performance_matrix,
    validate_corpus,
)
from tadbench.data.tadb import _HEADER, MAGIC, VERSION
from tadbench.errors import ConfigError, EmbeddingFormatError, MatrixFormatError

REPO_FIXTURES = Path(__file__).parent.parent / "fixtures" / "auroc"


def make_set(n=5, d=3, labeled=True, seed=0):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n).astype(np.uint8) if labeled else None
    return LabeledEmbeddingSet(
        "toy", "toy-model", rng.normal(size=(n, d)).astype(np.float32), labels
    )


class TestLabels:
    def test_membership_rule(self):
        assert assign_anomaly_labels([0, 1, 2, 1], normal_classes=[1]) == [1, 0, 1, 0]

    def test_relabelling_invariance(self):
        ids = [3, 7, 7, 2, 9]
        direct = assign_anomaly_labels(ids, normal_classes={7, 9})
        remap = {3: 30, 7: 70, 2: 20, 9: 90}
        renamed = assign_anomaly_labels([remap[i] for i in ids], normal_classes={70, 90})
        assert direct == renamed

    def test_empty_normal_set_rejected(self):
        with pytest.raises(ConfigError):
            assign_anomaly_labels([1, 2], normal_classes=[])

    @pytest.mark.parametrize("bad", [1.5, "1", True])
    def test_non_integer_ids_rejected(self, bad):
        with pytest.raises(TypeError):
            assign_anomaly_labels([0, bad], normal_classes=[0])


class TestCorpusTypes:
    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            TextRecord(id="r1", text="", class_id=0)

    def test_duplicate_ids_rejected(self):
        records = [TextRecord("a", "x", 0), TextRecord("a", "y", 1)]
        with pytest.raises(ValueError, match="duplicate"):
            validate_corpus(records)

    def test_unique_ids_pass(self):
        validate_corpus([TextRecord("a", "x", 0), TextRecord("b", "y", 1)])


class TestEmbeddingSet:
    def test_arrays_frozen(self):
        eset = make_set()
        with pytest.raises(ValueError):
            eset.matrix[0, 0] = 1.0
        with pytest.raises(ValueError):
            eset.labels[0] = 1

    def test_label_shape_mismatch(self):
        with pytest.raises(ValueError):
            LabeledEmbeddingSet("t", "m", np.zeros((3, 2)), np.zeros(2, np.uint8))

    def test_non_binary_labels(self):
        with pytest.raises(ValueError):
            LabeledEmbeddingSet("t", "m", np.zeros((3, 2)), np.array([0, 1, 2]))

    def test_non_finite_matrix(self):
        bad = np.zeros((2, 2), np.float32)
        bad[1, 1] = np.inf
        with pytest.raises(ValueError):
            LabeledEmbeddingSet("t", "m", bad)

    def test_without_labels(self):
        eset = make_set()
        assert eset.without_labels().labels is None

    def test_split_requires_all_normal_train(self):
        train = LabeledEmbeddingSet("t", "m", np.zeros((3, 2)), np.array([0, 1, 0]))
        test = LabeledEmbeddingSet("t", "m", np.ones((4, 2)), np.array([0, 0, 1, 1]))
        with pytest.raises(ValueError, match="all-normal"):
            BenchmarkSplit.of(train, test)

    def test_split_ratio_computed(self):
        train = make_set(labeled=False)
        test = LabeledEmbeddingSet("t", "m", np.zeros((4, 3)), np.array([0, 0, 1, 1]))
        split = BenchmarkSplit.of(train, test)
        assert split.anomaly_ratio == 0.5
        assert split.name == "toy"


class TestTadbRoundTrip:
    def test_labeled_round_trip(self, tmp_path):
        eset = make_set(n=17, d=5)
        path = tmp_path / "e.tadb"
        save_embedding_file(path, eset)
        back = load_embedding_file(path)
        np.testing.assert_array_equal(back.matrix, eset.matrix)
        np.testing.assert_array_equal(back.labels, eset.labels)
        assert back.name == "e"

    def test_unlabeled_round_trip(self, tmp_path):
        eset = make_set(labeled=False)
        path = tmp_path / "u.tadb"
        save_embedding_file(path, eset)
        assert load_embedding_file(path).labels is None

    @settings(max_examples=25, deadline=None)
    @given(
        n=st.integers(1, 40),
        d=st.integers(1, 16),
        labeled=st.booleans(),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_round_trip_bit_exact(self, tmp_path_factory, n, d, labeled, seed):
        eset = make_set(n=n, d=d, labeled=labeled, seed=seed)
        path = tmp_path_factory.mktemp("tadb") / "x.tadb"
        save_embedding_file(path, eset)
        back = load_embedding_file(path)
        assert back.matrix.tobytes() == eset.matrix.tobytes()
        if labeled:
            np.testing.assert_array_equal(back.labels, eset.labels)

    def test_save_is_deterministic(self, tmp_path):
        eset = make_set()
        a, b = tmp_path / "a.tadb", tmp_path / "b.tadb"
        save_embedding_file(a, eset)
        save_embedding_file(b, eset)
        assert a.read_bytes() == b.read_bytes()


class TestTadbFormatErrors:
    def _blob(self, n=2, d=2, labeled=True, seed=3):
        eset = make_set(n=n, d=d, labeled=labeled, seed=seed)
        header = _HEADER.pack(MAGIC, VERSION, n, d, 1 if labeled else 0)
        body = eset.matrix.astype("<f4").tobytes()
        if labeled:
            body += eset.labels.tobytes()
        return bytearray(header + body)

    def _expect(self, tmp_path, blob, offset, match=None):
        path = tmp_path / "bad.tadb"
        path.write_bytes(bytes(blob))
        with pytest.raises(EmbeddingFormatError, match=match) as err:
            load_embedding_file(path)
        assert err.value.offset == offset

    def test_bad_magic(self, tmp_path):
        blob = self._blob()
        blob[:4] = b"NOPE"
        self._expect(tmp_path, blob, offset=0, match="magic")

    def test_bad_version(self, tmp_path):
        blob = self._blob()
        blob[4:8] = (99).to_bytes(4, "little")
        self._expect(tmp_path, blob, offset=4, match="version")

    def test_zero_dimension(self, tmp_path):
        blob = self._blob()
        blob[12:16] = (0).to_bytes(4, "little")
        self._expect(tmp_path, blob, offset=12)

    def test_bad_flag(self, tmp_path):
        blob = self._blob()
        blob[16] = 7
        self._expect(tmp_path, blob, offset=16, match="flag")

    def test_truncated_header(self, tmp_path):
        self._expect(tmp_path, self._blob()[:10], offset=10, match="truncated")

    def test_truncated_payload(self, tmp_path):
        blob = self._blob()
        self._expect(tmp_path, blob[:-3], offset=len(blob) - 3, match="truncated")

    def test_trailing_bytes(self, tmp_path):
        blob = self._blob() + b"\x00\x00"
        self._expect(tmp_path, blob, offset=len(blob) - 2, match="trailing")

    def test_non_finite_value_offset(self, tmp_path):
        blob = self._blob(labeled=False)
        # overwrite matrix element 3 with +inf
        element = 3
        start = _HEADER.size + 4 * element
        blob[start : start + 4] = np.array([np.inf], "<f4").tobytes()
        self._expect(tmp_path, blob, offset=start, match="non-finite")

    def test_bad_label_byte_offset(self, tmp_path):
        n, d = 4, 2
        blob = self._blob(n=n, d=d)
        labels_off = _HEADER.size + 4 * n * d
        blob[labels_off + 2] = 9
        self._expect(tmp_path, blob, offset=labels_off + 2, match="not 0/1")


class TestPerformanceMatrixType:
    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            PerformanceMatrix("d", ("a", "a"), ("x",), [[1.0], [2.0]])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            PerformanceMatrix("d", ("a",), ("x",), [[101.0]])

    def test_nan_marks_missing(self):
        pm = PerformanceMatrix("d", ("a",), ("x", "y"), [[np.nan, 50.0]])
        assert not pm.is_complete
        assert pm.cell("a", "y") == 50.0

    def test_infinite_rejected(self):
        with pytest.raises(ValueError):
            PerformanceMatrix("d", ("a",), ("x",), [[np.inf]])


class TestPerfCsv:
    def test_round_trip_with_missing(self, tmp_path):
        pm = PerformanceMatrix(
            "toy", ("r1", "r2"), ("A", "B"), [[12.5, np.nan], [0.0, 99.875]]
        )
        path = tmp_path / "m.csv"
        save_performance_matrix(pm, path)
        back = load_performance_matrix(path)
        assert back.row_labels == pm.row_labels
        assert back.col_labels == pm.col_labels
        np.testing.assert_array_equal(back.values, pm.values)
        assert back.dataset == "m"

    def test_save_byte_identical(self, tmp_path):
        pm = PerformanceMatrix("toy", ("r",), ("A",), [[1.0 / 3.0 * 100]])
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        save_performance_matrix(pm, a)
        save_performance_matrix(pm, b)
        assert a.read_bytes() == b.read_bytes()
        # shortest repr round-trips through the loader bit for bit
        assert load_performance_matrix(a).values[0, 0] == pm.values[0, 0]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(MatrixFormatError, match="empty"):
            load_performance_matrix(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("wrong,A\nx,1\n")
        with pytest.raises(MatrixFormatError, match="row_label"):
            load_performance_matrix(path)

    def test_ragged_row_carries_index(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("row_label,A,B\nok,1,2\nshort,3\n")
        with pytest.raises(MatrixFormatError) as err:
            load_performance_matrix(path)
        assert err.value.row == 1

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "n.csv"
        path.write_text("row_label,A\nx,oops\n")
        with pytest.raises(MatrixFormatError, match="oops") as err:
            load_performance_matrix(path)
        assert err.value.row == 0

    def test_no_data_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("row_label,A\n")
        with pytest.raises(MatrixFormatError, match="no data"):
            load_performance_matrix(path)


class TestFixtures:
    def test_twelve_shipped(self):
        assert len(FIXTURE_NAMES) == 12
        assert available_fixtures() == FIXTURE_NAMES
        assert set(FIXTURE_NAMES) == set(DATASETS)

    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_grid_shape_and_labels(self, name):
        pm = load_fixture(name)
        assert pm.dataset == name
        assert pm.values.shape == (33, 10)
        assert pm.row_labels == EMBEDDING_ROW_LABELS
        assert pm.col_labels == DETECTOR_COLUMNS
        assert pm.is_complete
        assert pm.values.min() >= 0.0 and pm.values.max() <= 100.0

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            load_fixture("nope")

    def test_load_all(self):
        assert set(load_all_fixtures()) == set(FIXTURE_NAMES)

    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_packaged_matches_repo_copy(self, name):
        from importlib.resources import files

        packaged = files("tadbench.data").joinpath(f"fixtures/auroc/{name}.csv")
        repo = REPO_FIXTURES / f"{name}.csv"
        assert packaged.read_bytes() == repo.read_bytes()

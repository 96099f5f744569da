import numpy as np
import pytest
from scipy.sparse import csr_matrix, random as sparse_random

from src.data_utils.dataset_splitter import split_train_test, stratified_folds
from src.data_utils.feature_scaler import fit_scaling, scale_features
from src.data_utils.libsvm_processor import load_train_test, parse_libsvm, serialize_libsvm
from src.errors import DatasetParseError, EmptyDatasetError, FoldConstructionError, StratificationError
from src.modals.dataset_data import ScalingRecord, SparseVector

from conftest import make_dataset


def test_parse_remaps_labels_and_reads_dim():
    dataset = parse_libsvm("3 1:0.5 4:-2\n1 2:1")
    assert dataset.size == 2
    assert dataset.feature_dim == 4
    assert dataset.labels.tolist() == [2, 1]
    assert dataset.label_map == [1.0, 3.0]
    assert dataset.instance(0) == SparseVector(indices=(1, 4), values=(0.5, -2.0), dim=4)


def test_parse_empty_text_fails():
    with pytest.raises(EmptyDatasetError, match="empty dataset"):
        parse_libsvm("")
    with pytest.raises(EmptyDatasetError):
        parse_libsvm("\n   \n# only a comment\n")


@pytest.mark.parametrize("text, line", [
    ("1 1:1\n2 3:1 2:4\n", 2),
    ("1 1:1\n1 2:1\nx 1:1\n", 3),
    ("1 1:1 2-4\n", 1),
    ("1 0:1\n", 1),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(DatasetParseError) as info:
        parse_libsvm(text)
    assert info.value.line_number == line
    assert str(info.value).startswith(f"line {line}:")


def test_parse_honours_declared_dim_and_label_map():
    dataset = parse_libsvm("5 2:1\n", dim=6, label_map=[2.0, 5.0])
    assert dataset.feature_dim == 6
    assert dataset.labels.tolist() == [2]
    with pytest.raises(DatasetParseError):
        parse_libsvm("5 7:1\n", dim=6)
    with pytest.raises(DatasetParseError, match="unknown"):
        parse_libsvm("9 1:1\n", label_map=[2.0, 5.0])


def test_explicit_zeros_are_dropped():
    dataset = parse_libsvm("1 1:0 2:3\n")
    assert dataset.instance(0).indices == (2,)


def test_serialize_then_parse_is_identity():
    text = "-1 1:0.25 3:-4\n2 2:1.5\n7 1:1 2:2 3:3\n"
    dataset = parse_libsvm(text)
    assert serialize_libsvm(dataset) == text
    again = parse_libsvm(serialize_libsvm(dataset))
    assert again.label_map == dataset.label_map
    assert np.array_equal(again.labels, dataset.labels)
    assert (again.features != dataset.features).nnz == 0


def test_load_train_test_aligns_dims(tmp_path):
    train_path = tmp_path / 'train'
    test_path = tmp_path / 'test'
    train_path.write_text("1 1:1\n2 2:1\n")
    test_path.write_text("2 5:1\n")
    train, test = load_train_test(str(train_path), str(test_path))
    assert train.feature_dim == test.feature_dim == 5
    assert test.labels.tolist() == [2]


def test_split_is_stratified_and_deterministic():
    dataset = make_dataset(np.arange(20).reshape(10, 2), [1] * 5 + [2] * 5)
    train, test = split_train_test(dataset, 0.5, seed=7)
    assert train.size == 5 and test.size == 5
    assert set(train.labels.tolist()) == {1, 2}
    assert set(test.labels.tolist()) == {1, 2}

    again, _ = split_train_test(dataset, 0.5, seed=7)
    assert (again.features != train.features).nnz == 0

    rows = np.vstack([train.features.toarray(), test.features.toarray()])
    assert sorted(map(tuple, rows)) == sorted(map(tuple, dataset.features.toarray()))


def test_split_counts_respect_fraction():
    labels = [1] * 7 + [2] * 11 + [3] * 4
    dataset = make_dataset(np.arange(44).reshape(22, 2) + 1, labels)
    train, _ = split_train_test(dataset, 0.3, seed=0)
    expected = np.array([7, 11, 4]) * 0.3
    assert np.all(np.abs(train.class_counts() - expected) <= 1)


def test_split_rejects_class_losing_training_side():
    dataset = make_dataset([[1, 0], [0, 1], [1, 1], [2, 2]], [1, 2, 2, 2])
    with pytest.raises(StratificationError):
        split_train_test(dataset, 0.25, seed=0)


def test_stratified_folds_cover_every_row():
    dataset = make_dataset(np.arange(40).reshape(20, 2) + 1, [1] * 10 + [2] * 10)
    folds = stratified_folds(dataset, 5, seed=3)
    assert len(folds) == 5
    validation = np.sort(np.concatenate([valid for _, valid in folds]))
    assert validation.tolist() == list(range(20))
    for train_rows, valid_rows in folds:
        assert not set(train_rows) & set(valid_rows)
        assert set(dataset.labels[train_rows].tolist()) == {1, 2}


def test_stratified_folds_reject_tiny_class():
    dataset = make_dataset(np.arange(12).reshape(6, 2) + 1, [1, 1, 1, 1, 1, 2])
    with pytest.raises(FoldConstructionError):
        stratified_folds(dataset, 2, seed=0)


def test_scaling_endpoints_constants_and_extrapolation():
    train = make_dataset([[0, 4], [5, 4], [10, 4]], [1, 2, 1])
    test = make_dataset([[20, 4]], [1])
    scaled_train, scaled_test, record = scale_features(train, test)
    assert scaled_train.features.toarray()[:, 0].tolist() == [-1.0, 0.0, 1.0]
    assert scaled_train.features.toarray()[:, 1].tolist() == [0.0, 0.0, 0.0]
    assert scaled_test.features.toarray()[0].tolist() == [3.0, 0.0]
    assert record.span == [10.0, 0.0]


def test_symmetric_ranges_keep_features_sparse():
    features = sparse_random(2000, 50, density=0.01, format='csr', random_state=3)
    features.data = features.data * 2.0 - 1.0
    record = ScalingRecord(low=[-1.0] * 50, span=[2.0] * 50)
    scaled = record.apply(features)
    assert scaled.nnz == features.nnz
    assert scaled.toarray() == pytest.approx(features.toarray(), abs=1e-15)


def test_shifted_columns_match_the_dense_map(monkeypatch):
    monkeypatch.setattr('src.modals.dataset_data.SCALE_BLOCK_ENTRIES', 3)
    rng = np.random.default_rng(4)
    dense = rng.uniform(0.0, 4.0, size=(7, 5))
    dense[rng.random(size=dense.shape) < 0.5] = 0.0
    low = [0.0, -2.0, 1.0, 0.0, -1.0]
    span = [4.0, 4.0, 2.0, 0.0, 8.0]
    scaled = ScalingRecord(low=low, span=span).apply(csr_matrix(dense)).toarray()
    expected = 2.0 * (dense - low) / np.where(np.array(span) == 0, 1.0, span) - 1.0
    expected[:, 3] = 0.0
    assert scaled == pytest.approx(expected, abs=1e-12)


def test_scaling_hits_minus_one_and_one_exactly():
    rng = np.random.default_rng(5)
    points = rng.normal(size=(15, 4)) * [1.0, 3.0, 0.1, 7.0]
    train = make_dataset(points, [1] * 8 + [2] * 7)
    scaled = fit_scaling(train).apply(train.features).toarray()
    assert np.all(scaled.min(axis=0) == -1.0)
    assert np.all(scaled.max(axis=0) == 1.0)

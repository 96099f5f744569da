import io
from typing import Iterable, List, Sequence, TextIO, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from src.errors import DatasetParseError, EmptyDatasetError
from src.modals.dataset_data import SparseDataset, with_width
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def _parse_line(line: str, line_number: int) -> Tuple[float, List[int], List[float]]:
    tokens = line.split()
    try:
        label = float(tokens[0])
    except ValueError as error:
        raise DatasetParseError(f"malformed label '{tokens[0]}'", line_number) from error

    indices: List[int] = []
    values: List[float] = []
    previous = 0
    for token in tokens[1:]:
        index_text, sep, value_text = token.partition(':')
        if not sep:
            raise DatasetParseError(f"malformed token '{token}'", line_number)
        try:
            index = int(index_text)
            value = float(value_text)
        except ValueError as error:
            raise DatasetParseError(f"malformed token '{token}'", line_number) from error
        if index <= previous:
            raise DatasetParseError(
                f"non-increasing index {index} after {previous}", line_number
            )
        previous = index
        if value != 0.0:
            indices.append(index)
            values.append(value)
    return label, indices, values


def parse_libsvm(
    text: str | TextIO,
    dim: int | None = None,
    label_map: Sequence[float] | None = None
) -> SparseDataset:
    '''
    Parse `<label> <idx>:<val> ...` lines. Labels are remapped to 1..c in ascending
    order of the original values, unless `label_map` (from a training set) is given.
    '''
    stream = io.StringIO(text) if isinstance(text, str) else text

    labels: List[float] = []
    data: List[float] = []
    columns: List[int] = []
    indptr = [0]
    max_index = 0

    for line_number, raw_line in enumerate(stream, start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        label, indices, values = _parse_line(line, line_number)
        if dim is not None and indices and indices[-1] > dim:
            raise DatasetParseError(
                f"index {indices[-1]} exceeds declared dimension {dim}", line_number
            )
        labels.append(label)
        columns.extend(i - 1 for i in indices)
        data.extend(values)
        indptr.append(len(columns))
        if indices:
            max_index = max(max_index, indices[-1])

    if not labels:
        raise EmptyDatasetError()

    width = dim if dim is not None else max(max_index, 1)
    features = csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(columns, dtype=np.int64), indptr),
        shape=(len(labels), width)
    )

    if label_map is None:
        label_map = sorted(set(labels))
    lookup = {original: k + 1 for k, original in enumerate(label_map)}
    internal = np.empty(len(labels), dtype=np.int64)
    for i, original in enumerate(labels):
        if original not in lookup:
            raise DatasetParseError(f"label {original:g} unknown to the training label map")
        internal[i] = lookup[original]

    logger.debug("Parsed %d instances, %d classes, dim %d", len(labels), len(label_map), width)
    return SparseDataset(
        features=features,
        labels=internal,
        class_count=len(label_map),
        label_map=list(label_map)
    )


def _format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def serialize_libsvm(dataset: SparseDataset) -> str:
    '''Inverse of parse_libsvm: original labels, 1-based indices, zeros omitted.'''
    features = dataset.features.tocsr()
    features.sort_indices()
    lines = []
    for i in range(dataset.size):
        start, end = features.indptr[i], features.indptr[i + 1]
        entries = [
            f"{column + 1}:{_format_number(value)}"
            for column, value in zip(features.indices[start:end], features.data[start:end])
            if value != 0.0
        ]
        label = dataset.label_map[int(dataset.labels[i]) - 1]
        lines.append(" ".join([_format_number(label)] + entries))
    return "\n".join(lines) + "\n"


def load_libsvm_file(
    file_path: str,
    dim: int | None = None,
    label_map: Sequence[float] | None = None
) -> SparseDataset:
    logger.info("Loading LIBSVM dataset: '%s'", file_path)
    with open(file_path, 'r', encoding='utf-8') as fp:
        return parse_libsvm(fp, dim=dim, label_map=label_map)


def write_libsvm_file(dataset: SparseDataset, file_path: str):
    with open(file_path, 'w', encoding='utf-8') as fp:
        fp.write(serialize_libsvm(dataset))


def align_dims(datasets: Iterable[SparseDataset]) -> List[SparseDataset]:
    '''Give every dataset the largest feature dimension among them.'''
    datasets = list(datasets)
    width = max(d.feature_dim for d in datasets)
    return [d.with_features(with_width(d.features, width)) for d in datasets]


def load_train_test(train_path: str, test_path: str | None) -> Tuple[SparseDataset, SparseDataset | None]:
    '''Test labels are mapped through the training label map.'''
    train = load_libsvm_file(train_path)
    if test_path is None:
        return train, None
    test = load_libsvm_file(test_path, label_map=train.label_map)
    train, test = align_dims([train, test])
    return train, test

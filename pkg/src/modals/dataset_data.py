from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field, model_validator
from scipy.sparse import csr_matrix, diags, vstack

SCALE_BLOCK_ENTRIES = 1 << 22


class SparseVector(BaseModel):
    '''One instance: 1-based strictly increasing indices, zeros omitted.'''
    model_config = ConfigDict(frozen=True)

    indices: Tuple[int, ...] = ()
    values: Tuple[float, ...] = ()
    dim: int

    @model_validator(mode='after')
    def check_entries(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        previous = 0
        for index in self.indices:
            if index <= previous:
                raise ValueError("indices must be strictly increasing and positive")
            previous = index
        if self.indices and self.indices[-1] > self.dim:
            raise ValueError(f"index {self.indices[-1]} exceeds dim {self.dim}")
        return self

    def to_csr(self, dim: int | None = None) -> csr_matrix:
        width = self.dim if dim is None else max(dim, self.dim)
        columns = np.asarray(self.indices, dtype=np.int64) - 1
        return csr_matrix(
            (np.asarray(self.values, dtype=np.float64), columns, [0, len(columns)]),
            shape=(1, width)
        )

    @classmethod
    def from_csr_row(cls, row: csr_matrix) -> 'SparseVector':
        row = row.tocsr()
        row.sort_indices()
        keep = row.data != 0
        return cls(
            indices=tuple(int(i) + 1 for i in row.indices[keep]),
            values=tuple(float(v) for v in row.data[keep]),
            dim=row.shape[1]
        )


class SparseDataset(BaseModel):
    '''
    Labeled instances. `labels` are internal classes 1..c; `label_map[k-1]` is the
    original label of internal class k.
    '''
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: csr_matrix
    labels: np.ndarray
    class_count: int
    label_map: List[float]

    @model_validator(mode='after')
    def check_shapes(self):
        if self.features.shape[0] == 0:
            raise ValueError("dataset has no instances")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("instances and labels differ in count")
        if len(self.label_map) != self.class_count:
            raise ValueError("label map does not cover every class")
        if self.labels.min() < 1 or self.labels.max() > self.class_count:
            raise ValueError("labels outside 1..c")
        return self

    @computed_field
    @property
    def size(self) -> int:
        return int(self.features.shape[0])

    @computed_field
    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def __len__(self):
        return self.size

    def instance(self, i: int) -> SparseVector:
        return SparseVector.from_csr_row(self.features[i])

    def class_counts(self) -> np.ndarray:
        '''Instances per internal class, index 0 is class 1.'''
        return np.bincount(self.labels, minlength=self.class_count + 1)[1:]

    def subset(self, rows: np.ndarray) -> 'SparseDataset':
        '''Rows keep the parent's class numbering and label map.'''
        rows = np.asarray(rows, dtype=np.int64)
        return SparseDataset(
            features=self.features[rows],
            labels=self.labels[rows],
            class_count=self.class_count,
            label_map=self.label_map
        )

    def with_features(self, features: csr_matrix) -> 'SparseDataset':
        return SparseDataset(
            features=features,
            labels=self.labels,
            class_count=self.class_count,
            label_map=self.label_map
        )

    def original_labels(self, classes: np.ndarray) -> List[float]:
        return [self.label_map[int(k) - 1] for k in classes]


class ScalingRecord(BaseModel):
    '''
    Per-feature map x -> 2 (x - low) / span - 1 fitted on training data.
    Features with span 0 map to 0.
    '''
    low: List[float]
    span: List[float]

    def apply(self, features: csr_matrix) -> csr_matrix:
        dim = len(self.low)
        features = with_width(features, dim)
        low = np.asarray(self.low)
        span = np.asarray(self.span)

        scaled = features.copy()
        scaled.data = _affine(scaled.data, low[scaled.indices], span[scaled.indices])
        shifted = np.flatnonzero(_affine(np.zeros(dim), low, span))
        if shifted.size and scaled.shape[0]:
            # implicit zeros of shifted columns turn into values; densify those columns a row block at a time
            rows = max(1, SCALE_BLOCK_ENTRIES // shifted.size)
            blocks = [
                csr_matrix(_affine(features[start:start + rows][:, shifted].toarray(), low[shifted], span[shifted]))
                for start in range(0, features.shape[0], rows)
            ]
            kept = np.ones(dim)
            kept[shifted] = 0.0
            place = csr_matrix(
                (np.ones(shifted.size), (np.arange(shifted.size), shifted)),
                shape=(shifted.size, dim)
            )
            scaled = scaled @ diags(kept) + vstack(blocks, format='csr') @ place
        scaled = scaled.tocsr()
        scaled.eliminate_zeros()
        return scaled


def _affine(values: np.ndarray, low: np.ndarray, span: np.ndarray) -> np.ndarray:
    constant = span == 0
    return np.where(constant, 0.0, 2.0 * (values - low) / np.where(constant, 1.0, span) - 1.0)


def with_width(features: csr_matrix, dim: int) -> csr_matrix:
    '''Pad with empty columns or drop columns past `dim`.'''
    features = features.tocsr().astype(np.float64)
    if features.shape[1] > dim:
        return features[:, :dim].tocsr()
    return csr_matrix(
        (features.data, features.indices, features.indptr),
        shape=(features.shape[0], dim)
    )

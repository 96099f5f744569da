import os
from typing import List, Sequence

import numpy as np
import pytest
from scipy.sparse import csr_matrix

from src.data_utils.libsvm_processor import write_libsvm_file
from src.modals.dataset_data import SparseDataset


def make_dataset(points, labels, label_map: List[float] | None = None) -> SparseDataset:
    labels = np.asarray(labels, dtype=np.int64)
    class_count = int(labels.max())
    return SparseDataset(
        features=csr_matrix(np.asarray(points, dtype=np.float64)),
        labels=labels,
        class_count=class_count,
        label_map=label_map or [float(k) for k in range(1, class_count + 1)]
    )


def planted_clusters(centers: Sequence[Sequence[float]], per_class: int, noise: float, seed: int = 0) -> SparseDataset:
    '''One Gaussian ball per class; offsets are re-centered so each class mean is its center exactly.'''
    rng = np.random.default_rng(seed)
    points, labels = [], []
    for k, center in enumerate(centers, start=1):
        offsets = rng.normal(scale=noise, size=(per_class, len(center)))
        offsets -= offsets.mean(axis=0)
        points.append(np.asarray(center, dtype=np.float64) + offsets)
        labels.extend([k] * per_class)
    return make_dataset(np.vstack(points), labels)


# two groups of classes far apart on the first axis, symmetric about the origin
FOUR_CENTERS = [(-5.0, -0.5), (-5.0, 0.5), (5.0, -0.5), (5.0, 0.5)]
THREE_CENTERS = [(-5.0, 0.0), (5.0, -0.5), (5.0, 0.5)]
FIVE_CENTERS = [(-5.0, -0.5), (-5.0, 0.5), (5.0, -1.0), (5.0, 0.0), (5.0, 1.0)]


@pytest.fixture
def four_clusters() -> SparseDataset:
    return planted_clusters(FOUR_CENTERS, per_class=6, noise=0.1, seed=1)


@pytest.fixture
def three_clusters() -> SparseDataset:
    return planted_clusters(THREE_CENTERS, per_class=6, noise=0.1, seed=2)


@pytest.fixture
def five_clusters() -> SparseDataset:
    return planted_clusters(FIVE_CENTERS, per_class=5, noise=0.1, seed=3)


@pytest.fixture
def libsvm_file(tmp_path):
    '''Write a dataset to a LIBSVM file under tmp_path and return its path.'''

    def write(dataset: SparseDataset, name: str = 'data.libsvm') -> str:
        path = os.path.join(tmp_path, name)
        write_libsvm_file(dataset, path)
        return path

    return write


def pytest_collection_modifyitems(config, items):
    if os.getenv('MSMTREE_DATA_DIR'):
        return
    skip = pytest.mark.skip(reason="MSMTREE_DATA_DIR not set")
    for item in items:
        if 'acceptance' in item.keywords:
            item.add_marker(skip)

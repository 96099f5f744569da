from typing import List, Tuple

import numpy as np
from sklearn.model_selection import StratifiedKFold

from src.errors import FoldConstructionError, StratificationError
from src.modals.dataset_data import SparseDataset
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def _train_allocation(class_counts: np.ndarray, train_fraction: float) -> np.ndarray:
    '''
    Per-class training counts summing to round(fraction * N). Largest-remainder
    rounding keeps every class within one instance of its exact share.
    '''
    exact = class_counts * train_fraction
    allocation = np.floor(exact).astype(np.int64)
    total = int(np.floor(class_counts.sum() * train_fraction + 0.5))
    missing = total - int(allocation.sum())
    if missing > 0:
        remainders = exact - allocation
        # stable sort: ties go to the smaller class index
        order = np.argsort(-remainders, kind='stable')
        allocation[order[:missing]] += 1
    return allocation


def split_train_test(
    dataset: SparseDataset,
    train_fraction: float,
    seed: int
) -> Tuple[SparseDataset, SparseDataset]:
    '''Stratified, seeded partition into a training and a test part.'''
    if not 0.0 < train_fraction < 1.0:
        raise StratificationError(f"train fraction {train_fraction} outside (0, 1)")

    rng = np.random.default_rng(seed)
    counts = dataset.class_counts()
    allocation = _train_allocation(counts, train_fraction)

    train_rows: List[np.ndarray] = []
    test_rows: List[np.ndarray] = []
    for k in range(1, dataset.class_count + 1):
        members = np.flatnonzero(dataset.labels == k)
        if len(members) == 0:
            continue
        take = int(allocation[k - 1])
        if take == 0:
            raise StratificationError(
                f"class {dataset.label_map[k - 1]:g} ({len(members)} instances) "
                f"gets no training instance at fraction {train_fraction}"
            )
        members = rng.permutation(members)
        train_rows.append(members[:take])
        test_rows.append(members[take:])

    train_index = np.sort(np.concatenate(train_rows))
    test_index = np.sort(np.concatenate(test_rows))
    if len(test_index) == 0:
        raise StratificationError("test part is empty")

    logger.info("Split %d instances into %d train / %d test (seed %d)",
                dataset.size, len(train_index), len(test_index), seed)
    return dataset.subset(train_index), dataset.subset(test_index)


def stratified_folds(
    dataset: SparseDataset,
    folds: int,
    seed: int
) -> List[Tuple[np.ndarray, np.ndarray]]:
    '''k-fold stratified (train rows, validation rows) pairs.'''
    counts = dataset.class_counts()
    present = counts[counts > 0]
    if folds < 2:
        raise FoldConstructionError("need at least 2 folds")
    if present.min() < folds:
        smallest = int(np.argmin(np.where(counts > 0, counts, np.iinfo(np.int64).max)))
        raise FoldConstructionError(
            f"class {dataset.label_map[smallest]:g} has {int(counts[smallest])} "
            f"instances, fewer than {folds} folds; a fold would lose it"
        )
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    placeholder = np.zeros((dataset.size, 1))
    return [
        (np.asarray(train_rows), np.asarray(valid_rows))
        for train_rows, valid_rows in splitter.split(placeholder, dataset.labels)
    ]

from typing import Tuple

import numpy as np

from src.modals.dataset_data import ScalingRecord, SparseDataset, with_width
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def fit_scaling(train: SparseDataset) -> ScalingRecord:
    '''Affine map sending each training feature's [min, max] onto [-1, 1].'''
    features = train.features.tocsc()
    # missing entries are zeros and take part in min/max
    low = np.asarray(features.min(axis=0).todense()).ravel()
    high = np.asarray(features.max(axis=0).todense()).ravel()
    span = high - low

    constant = int((span == 0).sum())
    if constant:
        logger.debug("%d constant features mapped to 0", constant)
    return ScalingRecord(low=low.tolist(), span=span.tolist())


def scale_features(
    train: SparseDataset,
    test: SparseDataset
) -> Tuple[SparseDataset, SparseDataset, ScalingRecord]:
    '''Scale train into [-1, 1] per feature and push test through the same map.'''
    record = fit_scaling(train)
    scaled_train = train.with_features(record.apply(train.features))
    scaled_test = test.with_features(
        record.apply(with_width(test.features, train.feature_dim))
    )
    logger.info("Scaled %d features on %d training instances", train.feature_dim, train.size)
    return scaled_train, scaled_test, record

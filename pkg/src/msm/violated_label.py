from itertools import product
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix, diags, issparse

from src.errors import SearchExhaustedError
from src.modals.split_data import CompressedLabel, NodeProblem
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

EXHAUSTIVE_BALANCE_LIMIT = 20


def min_imbalance(class_sizes: np.ndarray) -> Tuple[float, Tuple[int, ...]]:
    '''
    Smallest |sum_k n_k s_k| over nontrivial sign vectors and one vector reaching it.
    Exhaustive up to EXHAUSTIVE_BALANCE_LIMIT classes, greedy partition above.
    '''
    sizes = np.asarray(class_sizes, dtype=np.float64)
    count = len(sizes)
    if count < 2:
        raise ValueError("need at least two classes")

    if count <= EXHAUSTIVE_BALANCE_LIMIT:
        # first sign fixed to +1, covers every labeling up to global flip
        tails = np.array(list(product((1, -1), repeat=count - 1)), dtype=np.int64)
        signs = np.hstack([np.ones((len(tails), 1), dtype=np.int64), tails])
        signs = signs[1:]  # row 0 is all +1, the trivial labeling
        imbalance = np.abs(signs @ sizes)
        best = int(np.argmin(imbalance))
        return float(imbalance[best]), tuple(int(s) for s in signs[best])

    # largest classes first, each to the currently lighter side
    signs = np.zeros(count, dtype=np.int64)
    total = 0.0
    for k in np.argsort(-sizes, kind='stable'):
        signs[k] = -1 if total > 0 else 1
        total += signs[k] * sizes[k]
    if signs[0] == -1:
        signs = -signs
    return float(abs(total)), tuple(int(s) for s in signs)


def per_class_sums(problem: NodeProblem, alpha: np.ndarray) -> np.ndarray:
    '''t_kl = sum over instances j of class k of alpha_j x_jl, shape (c*, s_eff).'''
    features = problem.search_features()
    n = problem.size
    indicator = csr_matrix(
        (np.ones(n), (problem.instance_classes, np.arange(n))),
        shape=(problem.class_count, n)
    )
    weighted = indicator @ diags(alpha)
    sums = weighted @ features
    if issparse(sums):
        sums = sums.toarray()
    return np.asarray(sums, dtype=np.float64)


def balance_signs(
    t: np.ndarray,
    class_sizes: np.ndarray,
    beta: float
) -> Optional[np.ndarray]:
    '''
    Signs following t (zero counts as +1), then the smallest-|t| classes on the
    heavier side are flipped until the imbalance is within beta. None when the
    greedy rule cannot reach a nontrivial balanced labeling.
    '''
    signs = np.where(t >= 0, 1, -1)
    order = np.argsort(np.abs(t), kind='stable')
    imbalance = float(class_sizes @ signs)

    while abs(imbalance) > beta:
        heavy = 1 if imbalance > 0 else -1
        for k in order:
            # a flip must strictly shrink |imbalance|
            if signs[k] == heavy and class_sizes[k] < abs(imbalance):
                signs[k] = -heavy
                imbalance -= 2 * heavy * class_sizes[k]
                break
        else:
            return None

    if np.all(signs == signs[0]):
        k = order[0]
        signs[k] = -signs[k]
        if abs(class_sizes @ signs) > beta:
            return None
    return signs


def search_score(t_column: np.ndarray, signs: Iterable[int]) -> float:
    return float(abs(t_column @ np.asarray(list(signs), dtype=np.float64)))


def most_violated_label(
    problem: NodeProblem,
    alpha: np.ndarray,
    exclude: Iterable[CompressedLabel] = ()
) -> CompressedLabel:
    '''
    l-infinity surrogate of the most violated labeling: per feature dimension take the
    balanced sign pattern of the per-class sums, return the best-scoring one not in
    `exclude` (compared up to global flip). Ties go to the smallest dimension.
    '''
    excluded = {label.canonical() for label in exclude}
    sums = per_class_sums(problem, alpha)
    sizes = problem.class_sizes.astype(np.float64)
    fallback = None

    # sum_k |t_kl| bounds every score reachable on dimension l
    bounds = np.abs(sums).sum(axis=0)
    best: Optional[Tuple[float, int, Tuple[int, ...]]] = None
    for l in np.argsort(-bounds, kind='stable'):
        if best is not None and bounds[l] < best[0]:
            break
        column = sums[:, l]
        signs = balance_signs(column, sizes, problem.beta)
        if signs is None:
            if fallback is None:
                fallback = np.asarray(min_imbalance(sizes)[1])
            signs = fallback if column @ fallback >= 0 else -fallback
        label = CompressedLabel(signs=tuple(int(s) for s in signs))
        if label.canonical() in excluded:
            continue
        score = search_score(column, label.signs)
        if best is None or score > best[0] or (score == best[0] and l < best[1]):
            best = (score, int(l), label.signs)

    if best is None:
        raise SearchExhaustedError("every candidate labeling is already active")
    logger.debug("Most violated labeling %s on dimension %d (score %.6g)", best[2], best[1], best[0])
    return CompressedLabel(signs=best[2])

from itertools import combinations
from typing import Dict, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from src.errors import ModelFormatError, MsmTreeError
from src.modals.dataset_data import SparseDataset, SparseVector
from src.modals.multiclass_data import OneVsOneModel
from src.modals.svm_data import KernelSpec, SolverOptions
from src.solver.svm_model import decision_values, model_from_dict, model_to_dict, train_binary_svm
from src.tasks.fit_task import CallableTask
from src.tasks.task_executor import FitTaskExecutor
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

Pair = Tuple[int, int]


def _train_pair(train: SparseDataset, pair: Pair, kernel: KernelSpec, C: float, options: SolverOptions | None):
    i, j = pair
    rows = np.flatnonzero((train.labels == i) | (train.labels == j))
    z = np.where(train.labels[rows] == i, 1.0, -1.0)
    return train_binary_svm(train.features[rows], z, kernel, C, refs=rows, options=options)


def train_1vs1(
    train: SparseDataset,
    kernel: KernelSpec,
    C: float,
    options: SolverOptions | None = None,
    max_workers: int | None = None
) -> OneVsOneModel:
    missing = [k for k, n in enumerate(train.class_counts(), start=1) if n == 0]
    if missing:
        raise MsmTreeError(f"classes without training instances: {missing}")

    executor = FitTaskExecutor(max_workers)
    for pair in combinations(range(1, train.class_count + 1), 2):
        executor.add_task(CallableTask(pair, _train_pair, train, pair, kernel, C, options))
    executor.run_tasks()

    classifiers = {result.key: result.value for result in executor.fetch_results()}
    logger.info("Trained %d pairwise classifiers", len(classifiers))
    return OneVsOneModel(class_count=train.class_count, classifiers=classifiers)


def one_vs_one_vote(pair_scores: Dict[Pair, np.ndarray], class_count: int) -> np.ndarray:
    '''
    Majority vote; a decision >= 0 counts for the first class of the pair. Ties go to
    the larger sum of winning |decision|, then to the smallest class.
    '''
    n = len(next(iter(pair_scores.values())))
    votes = np.zeros((n, class_count))
    strength = np.zeros((n, class_count))
    for (i, j), scores in pair_scores.items():
        first_wins = scores >= 0
        votes[first_wins, i - 1] += 1
        votes[~first_wins, j - 1] += 1
        strength[first_wins, i - 1] += np.abs(scores[first_wins])
        strength[~first_wins, j - 1] += np.abs(scores[~first_wins])

    leading = votes == votes.max(axis=1, keepdims=True)
    strength = np.where(leading, strength, -np.inf)
    # argmax takes the first maximum, i.e. the smallest class
    return np.argmax(strength, axis=1) + 1


def predict_1vs1_batch(model: OneVsOneModel, features: csr_matrix) -> Tuple[np.ndarray, np.ndarray]:
    scores = {pair: decision_values(svm, features) for pair, svm in model.classifiers.items()}
    classes = one_vs_one_vote(scores, model.class_count)
    evals = np.full(features.shape[0], len(model.classifiers), dtype=np.int64)
    return classes, evals


def predict_1vs1(model: OneVsOneModel, x: SparseVector | csr_matrix) -> Tuple[int, int]:
    row = x.to_csr() if isinstance(x, SparseVector) else x
    classes, evals = predict_1vs1_batch(model, row)
    return int(classes[0]), int(evals[0])


def one_vs_one_to_dict(model: OneVsOneModel) -> dict:
    return {
        'scheme': '1vs1',
        'class_count': model.class_count,
        'classifiers': [
            {'pair': [i, j], 'model': model_to_dict(svm)}
            for (i, j), svm in sorted(model.classifiers.items())
        ],
    }


def one_vs_one_from_dict(obj: dict) -> OneVsOneModel:
    try:
        classifiers = {
            (int(entry['pair'][0]), int(entry['pair'][1])): model_from_dict(entry['model'])
            for entry in obj['classifiers']
        }
        return OneVsOneModel(class_count=int(obj['class_count']), classifiers=classifiers)
    except (KeyError, IndexError, TypeError, ValueError) as error:
        raise ModelFormatError(f"malformed 1vs1 model: {error}") from error

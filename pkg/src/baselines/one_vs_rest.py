from typing import Tuple

import numpy as np
from scipy.sparse import csr_matrix

from src.errors import ModelFormatError, MsmTreeError
from src.modals.dataset_data import SparseDataset, SparseVector
from src.modals.multiclass_data import OneVsRestModel
from src.modals.svm_data import KernelSpec, SolverOptions
from src.solver.svm_model import decision_values, model_from_dict, model_to_dict, train_binary_svm
from src.tasks.fit_task import CallableTask
from src.tasks.task_executor import FitTaskExecutor
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def _train_class(train: SparseDataset, k: int, kernel: KernelSpec, C: float, options: SolverOptions | None):
    z = np.where(train.labels == k, 1.0, -1.0)
    return train_binary_svm(train.features, z, kernel, C, options=options)


def train_1vsR(
    train: SparseDataset,
    kernel: KernelSpec,
    C: float,
    options: SolverOptions | None = None,
    max_workers: int | None = None
) -> OneVsRestModel:
    missing = [k for k, n in enumerate(train.class_counts(), start=1) if n == 0]
    if missing:
        raise MsmTreeError(f"classes without training instances: {missing}")

    executor = FitTaskExecutor(max_workers)
    for k in range(1, train.class_count + 1):
        executor.add_task(CallableTask((k,), _train_class, train, k, kernel, C, options))
    executor.run_tasks()

    classifiers = {result.key[0]: result.value for result in executor.fetch_results()}
    logger.info("Trained %d one-vs-rest classifiers", len(classifiers))
    return OneVsRestModel(class_count=train.class_count, classifiers=classifiers)


def predict_1vsR_batch(model: OneVsRestModel, features: csr_matrix) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.column_stack([
        decision_values(model.classifiers[k], features)
        for k in range(1, model.class_count + 1)
    ])
    # argmax keeps the first maximum, so ties go to the smallest class
    classes = np.argmax(scores, axis=1) + 1
    evals = np.full(features.shape[0], model.class_count, dtype=np.int64)
    return classes, evals


def predict_1vsR(model: OneVsRestModel, x: SparseVector | csr_matrix) -> Tuple[int, int]:
    row = x.to_csr() if isinstance(x, SparseVector) else x
    classes, evals = predict_1vsR_batch(model, row)
    return int(classes[0]), int(evals[0])


def one_vs_rest_to_dict(model: OneVsRestModel) -> dict:
    return {
        'scheme': '1vsr',
        'class_count': model.class_count,
        'classifiers': [
            {'class': k, 'model': model_to_dict(model.classifiers[k])}
            for k in range(1, model.class_count + 1)
        ],
    }


def one_vs_rest_from_dict(obj: dict) -> OneVsRestModel:
    try:
        classifiers = {int(entry['class']): model_from_dict(entry['model']) for entry in obj['classifiers']}
        return OneVsRestModel(class_count=int(obj['class_count']), classifiers=classifiers)
    except (KeyError, TypeError, ValueError) as error:
        raise ModelFormatError(f"malformed 1vsR model: {error}") from error

import time
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from src.errors import EmptyDatasetError
from src.harness.methods import TrainedModel
from src.modals.app_data import EvalReport
from src.modals.dataset_data import SparseDataset
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def class_confusion(true: np.ndarray, predicted: np.ndarray, class_count: int) -> np.ndarray:
    '''c x c counts, row = true class, column = predicted class, classes 1..c.'''
    return confusion_matrix(true, predicted, labels=list(range(1, class_count + 1)))


def mean_per_class_accuracy(confusion: np.ndarray) -> Tuple[float, List[Optional[float]], List[int]]:
    '''
    Mean of the row-normalized diagonal. Rows without test instances are left out
    and returned as 0-based indices.
    '''
    confusion = np.asarray(confusion, dtype=np.float64)
    totals = confusion.sum(axis=1)
    per_class: List[Optional[float]] = []
    empty: List[int] = []
    for k, total in enumerate(totals):
        if total == 0:
            per_class.append(None)
            empty.append(k)
        else:
            per_class.append(float(confusion[k, k] / total))
    scored = [value for value in per_class if value is not None]
    if not scored:
        raise EmptyDatasetError("no test instances to score")
    return float(np.mean(scored)), per_class, empty


def score_predictions(true: np.ndarray, predicted: np.ndarray, class_count: int) -> float:
    return mean_per_class_accuracy(class_confusion(true, predicted, class_count))[0]


def evaluate(
    trained: TrainedModel,
    test: SparseDataset,
    hyperparameters: Dict[str, float] | None = None,
    seed: int = 0,
    scaled: bool = True,
    wall_time_seconds: float = 0.0
) -> EvalReport:
    '''Score `trained` on `test`, whose features must already be on the training scale.'''
    if test.size == 0:
        raise EmptyDatasetError("empty test set")

    started = time.perf_counter()
    predicted, evals = trained.predict_batch(test.features)
    elapsed = time.perf_counter() - started

    class_count = trained.class_count
    confusion = class_confusion(test.labels, predicted, class_count)
    metric, per_class, empty = mean_per_class_accuracy(confusion)
    if empty:
        logger.info("%d classes have no test instances and are left out of the mean", len(empty))

    report = EvalReport(
        method=trained.method.value,
        class_count=class_count,
        labels=list(trained.label_map),
        confusion=confusion.astype(int).tolist(),
        per_class_accuracy=per_class,
        mean_per_class_accuracy=metric,
        empty_classes=[trained.label_map[k] for k in empty],
        test_size=test.size,
        evals_mean=float(evals.mean()),
        evals_max=int(evals.max()),
        evals_min=int(evals.min()),
        hyperparameters=hyperparameters or {'C': trained.C, 'eta': trained.kernel.eta},
        kernel=trained.kernel.kind.value,
        seed=seed,
        scaled=scaled,
        non_converged=trained.non_converged(),
        wall_time_seconds=wall_time_seconds,
        prediction_seconds_per_instance=elapsed / test.size
    )
    logger.info("%s: mean per-class accuracy %.4f, %.2f evaluations per instance",
                report.method, metric, report.evals_mean)
    return report


def confusion_frame(report: EvalReport) -> pd.DataFrame:
    names = [f"{label:g}" for label in report.labels]
    return pd.DataFrame(report.confusion, index=pd.Index(names, name='true'), columns=names)


def write_confusion_csv(report: EvalReport, file_path: str):
    confusion_frame(report).to_csv(file_path)

from typing import List, Tuple

import numpy as np
import pandas as pd

from src.data_utils.dataset_splitter import stratified_folds
from src.errors import FoldConstructionError
from src.harness.evaluation import score_predictions
from src.harness.methods import kernel_spec, train_method
from src.modals.app_data import ExperimentConfig
from src.modals.dataset_data import SparseDataset
from src.tasks.fit_task import FitTask
from src.tasks.task_executor import FitTaskExecutor
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


class FoldFit(FitTask):
    '''Train on one fold's training rows at one (C, eta) and score its validation rows.'''

    def __init__(self, cfg: ExperimentConfig, train: SparseDataset, fold: int,
                 rows: Tuple[np.ndarray, np.ndarray], C: float, eta: float):
        self.cfg = cfg
        self.train = train
        self.fold = fold
        self.rows = rows
        self.C = C
        self.eta = eta

    @property
    def key(self) -> tuple:
        return (self.C, self.eta, self.fold)

    def run(self) -> float:
        train_rows, valid_rows = self.rows
        fit_part = self.train.subset(train_rows)
        valid_part = self.train.subset(valid_rows)
        trained = train_method(
            self.cfg.method,
            fit_part,
            kernel_spec(self.cfg.kernel, self.eta),
            self.C,
            split_options=self.cfg.split,
            seed=self.cfg.seed,
            max_workers=1
        )
        predicted, _ = trained.predict_batch(valid_part.features)
        return score_predictions(valid_part.labels, predicted, self.train.class_count)


def cross_validate(
    train: SparseDataset,
    cfg: ExperimentConfig,
    max_workers: int | None = None
) -> Tuple[float, float, pd.DataFrame]:
    '''
    Stratified k-fold search over the (C, eta) grid by mean per-class accuracy.
    Ties go to the smaller C, then the smaller eta. A single candidate is returned untrained.
    '''
    candidates = cfg.candidate_grid()
    if len(candidates) == 1:
        C, eta = candidates[0]
        return C, eta, pd.DataFrame([{'C': C, 'eta': eta, 'score': np.nan}])

    folds = stratified_folds(train, cfg.folds, cfg.seed)
    for fold, (train_rows, _) in enumerate(folds):
        if len(np.unique(train.labels[train_rows])) < train.class_count:
            raise FoldConstructionError(f"fold {fold} loses a class from its training part")

    executor = FitTaskExecutor(max_workers)
    for C, eta in candidates:
        for fold, rows in enumerate(folds):
            executor.add_task(FoldFit(cfg, train, fold, rows, C, eta))
    executor.run_tasks()

    scores = {}
    for result in executor.fetch_results():
        C, eta, _ = result.key
        scores.setdefault((C, eta), []).append(result.value)

    rows: List[dict] = [
        {'C': C, 'eta': eta, 'score': float(np.mean(scores[(C, eta)]))}
        for C, eta in candidates
    ]
    table = pd.DataFrame(rows)
    # candidates are already in tie-break order and idxmax keeps the first maximum
    best = table.loc[table['score'].idxmax()]
    logger.info("Cross-validation picked C=%g eta=%g (score %.4f over %d folds)",
                best['C'], best['eta'], best['score'], cfg.folds)
    return float(best['C']), float(best['eta']), table

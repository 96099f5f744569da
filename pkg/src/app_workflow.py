import json
import os
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse import vstack

from src.data_utils.dataset_splitter import split_train_test
from src.data_utils.feature_scaler import scale_features
from src.data_utils.libsvm_processor import load_libsvm_file, load_train_test
from src.errors import MsmTreeError
from src.harness.cross_validation import cross_validate
from src.harness.evaluation import evaluate, write_confusion_csv
from src.harness.methods import TrainedModel, kernel_spec, train_method
from src.harness.model_store import load_trained, save_trained, write_json
from src.modals.app_data import DEFAULT_REPEATS, EvalReport, ExperimentConfig, Method
from src.modals.dataset_data import ScalingRecord, SparseDataset
from src.msm.node_split import build_node_problem, split_node
from src.utils.logger import attach_trace_file, detach_trace_handler, get_module_logger

logger = get_module_logger(__name__)

REPORT_FILE = 'report.json'
CONFUSION_FILE = 'confusion.csv'
TRACE_FILE = 'trace.log'
CV_FILE = 'cv.csv'


def load_experiment_data(cfg: ExperimentConfig, seed: Optional[int] = None) -> Tuple[SparseDataset, SparseDataset]:
    '''Train/test pair from two files, or a seeded stratified split of the training file.'''
    train, test = load_train_test(cfg.train_path, cfg.test_path)
    if test is not None:
        return train, test
    if cfg.train_fraction is None:
        raise MsmTreeError("give a test file or a train fraction")
    return split_train_test(train, cfg.train_fraction, cfg.seed if seed is None else seed)


def prepare(
    cfg: ExperimentConfig,
    train: SparseDataset,
    test: SparseDataset
) -> Tuple[SparseDataset, SparseDataset, Optional[ScalingRecord]]:
    if not cfg.scale:
        return train, test, None
    return scale_features(train, test)


def fit(
    cfg: ExperimentConfig,
    train: SparseDataset,
    C: float,
    eta: float,
    scaling: Optional[ScalingRecord] = None
) -> TrainedModel:
    '''Final fit at tuned parameters; with `trace` the split iterations go to trace.log.'''
    handler = None
    if cfg.trace:
        os.makedirs(cfg.out_dir, exist_ok=True)
        handler = attach_trace_file(os.path.join(cfg.out_dir, TRACE_FILE))
    try:
        return train_method(
            cfg.method,
            train,
            kernel_spec(cfg.kernel, eta),
            C,
            split_options=cfg.split,
            seed=cfg.seed,
            scaling=scaling
        )
    finally:
        if handler is not None:
            detach_trace_handler(handler)


def train_model(cfg: ExperimentConfig) -> TrainedModel:
    '''Tune and fit on the whole training file, then save the model.'''
    train = load_libsvm_file(cfg.train_path)
    scaling = None
    if cfg.scale:
        train, _, scaling = scale_features(train, train)
    C, eta, table = cross_validate(train, cfg)
    trained = fit(cfg, train, C, eta, scaling)
    save_trained(trained, cfg.out_dir)
    table.to_csv(os.path.join(cfg.out_dir, CV_FILE), index=False)
    return trained


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    '''
    Load, scale, tune (C, eta) by cross-validation, train, evaluate, and write
    report.json, confusion.csv, model.json (and tree.json for tree methods).
    '''
    started = time.perf_counter()
    train, test = load_experiment_data(cfg)
    train, test, scaling = prepare(cfg, train, test)
    logger.info("Experiment: method=%s kernel=%s train=%d test=%d classes=%d",
                cfg.method.value, cfg.kernel.value, train.size, test.size, train.class_count)

    C, eta, table = cross_validate(train, cfg)
    trained = fit(cfg, train, C, eta, scaling)
    report = evaluate(
        trained,
        test,
        hyperparameters={'C': C, 'eta': eta},
        seed=cfg.seed,
        scaled=cfg.scale,
        wall_time_seconds=time.perf_counter() - started
    )
    write_outputs(cfg.out_dir, report, trained)
    table.to_csv(os.path.join(cfg.out_dir, CV_FILE), index=False)
    return report


def write_outputs(out_dir: str, report: EvalReport, trained: Optional[TrainedModel] = None):
    os.makedirs(out_dir, exist_ok=True)
    write_json(report.model_dump(), os.path.join(out_dir, REPORT_FILE))
    write_confusion_csv(report, os.path.join(out_dir, CONFUSION_FILE))
    if trained is not None:
        save_trained(trained, out_dir)


def _load_for_model(trained: TrainedModel, data_path: str) -> SparseDataset:
    dataset = load_libsvm_file(data_path, label_map=trained.label_map)
    return dataset.with_features(trained.prepare(dataset.features))


def predict_file(model_dir: str, data_path: str, out_path: Optional[str] = None) -> pd.DataFrame:
    '''Predicted original labels and evaluation counts, one row per instance of `data_path`.'''
    trained = load_trained(model_dir)
    dataset = _load_for_model(trained, data_path)
    classes, evals = trained.predict_batch(dataset.features)
    frame = pd.DataFrame({
        'label': [trained.label_map[k - 1] for k in classes],
        'evals': evals,
    })
    if out_path is not None:
        frame.to_csv(out_path, index=False)
    return frame


def evaluate_saved(model_dir: str, test_path: str, out_dir: Optional[str] = None) -> EvalReport:
    trained = load_trained(model_dir)
    test = _load_for_model(trained, test_path)
    report = evaluate(
        trained,
        test,
        hyperparameters={'C': trained.C, 'eta': trained.kernel.eta},
        scaled=trained.scaling is not None
    )
    if out_dir is not None:
        write_outputs(out_dir, report)
    return report


def _pooled(cfg: ExperimentConfig) -> SparseDataset:
    train, test = load_train_test(cfg.train_path, cfg.test_path)
    if test is None:
        return train
    # pool both files so every repeat draws its own split
    return SparseDataset(
        features=vstack([train.features, test.features]).tocsr(),
        labels=np.concatenate([train.labels, test.labels]),
        class_count=train.class_count,
        label_map=train.label_map
    )


def compare(
    cfg: ExperimentConfig,
    methods: Sequence[Method],
    repeats: int = DEFAULT_REPEATS
) -> pd.DataFrame:
    '''
    Every method over `repeats` seeded stratified splits. (C, eta) is tuned once per
    method on the first split's training part and reused for the rest.
    '''
    if cfg.train_fraction is None:
        raise MsmTreeError("compare needs a train fraction")
    pooled = _pooled(cfg)
    realizations = []
    for r in range(repeats):
        train, test = split_train_test(pooled, cfg.train_fraction, cfg.seed + r)
        realizations.append(prepare(cfg, train, test))

    rows: List[dict] = []
    runs: List[dict] = []
    for method in methods:
        method_cfg = cfg.model_copy(update={'method': method})
        C, eta, _ = cross_validate(realizations[0][0], method_cfg)
        scores, evals_mean, evals_max = [], [], []
        for r, (train, test, scaling) in enumerate(realizations):
            trained = train_method(method, train, kernel_spec(cfg.kernel, eta), C,
                                   split_options=cfg.split, seed=cfg.seed + r, scaling=scaling)
            report = evaluate(trained, test, hyperparameters={'C': C, 'eta': eta}, seed=cfg.seed + r, scaled=cfg.scale)
            scores.append(report.mean_per_class_accuracy)
            evals_mean.append(report.evals_mean)
            evals_max.append(report.evals_max)
            runs.append({'method': method.value, 'repeat': r, **report.deterministic_dump()})
        rows.append({
            'method': method.value,
            'accuracy_mean': float(np.mean(scores)),
            'accuracy_std': float(np.std(scores)),
            'evals_mean': float(np.mean(evals_mean)),
            'evals_max': int(np.max(evals_max)),
            'C': C,
            'eta': eta,
            'repeats': repeats,
        })
        logger.info("%s: %.4f ± %.4f over %d splits", method.value, rows[-1]['accuracy_mean'],
                    rows[-1]['accuracy_std'], repeats)

    table = pd.DataFrame(rows)
    os.makedirs(cfg.out_dir, exist_ok=True)
    table.to_csv(os.path.join(cfg.out_dir, 'comparison.csv'), index=False)
    write_json({'summary': rows, 'runs': runs}, os.path.join(cfg.out_dir, 'comparison.json'))
    return table


def restrict_classes(dataset: SparseDataset, class_count: int) -> SparseDataset:
    '''Instances of internal classes 1..class_count only.'''
    rows = np.flatnonzero(dataset.labels <= class_count)
    return SparseDataset(
        features=dataset.features[rows],
        labels=dataset.labels[rows],
        class_count=class_count,
        label_map=dataset.label_map[:class_count]
    )


def cost_curve(
    cfg: ExperimentConfig,
    methods: Sequence[Method],
    class_counts: Sequence[int]
) -> pd.DataFrame:
    '''
    Mean classifier evaluations per test instance against the number of classes,
    training on the first c classes only. Uses the fixed C and eta of `cfg`
    (1 and 1/dim when unset) since the counts do not depend on them for 1vs1 and 1vsR.
    '''
    train, test = load_experiment_data(cfg)
    train, test, _ = prepare(cfg, train, test)
    C = cfg.C if cfg.C is not None else 1.0
    eta = cfg.eta if cfg.eta is not None else 1.0 / max(train.feature_dim, 1)

    rows = []
    for c in sorted(set(class_counts)):
        if not 2 <= c <= train.class_count:
            raise MsmTreeError(f"class count {c} outside 2..{train.class_count}")
        part_train, part_test = restrict_classes(train, c), restrict_classes(test, c)
        for method in methods:
            trained = train_method(method, part_train, kernel_spec(cfg.kernel, eta), C,
                                   split_options=cfg.split, seed=cfg.seed)
            _, evals = trained.predict_batch(part_test.features)
            rows.append({'classes': c, 'method': method.value,
                         'evals_mean': float(evals.mean()), 'evals_max': int(evals.max())})

    table = pd.DataFrame(rows)
    os.makedirs(cfg.out_dir, exist_ok=True)
    table.to_csv(os.path.join(cfg.out_dir, 'cost_curve.csv'), index=False)
    return table


def trace_root_split(cfg: ExperimentConfig, classes: Optional[Sequence[int]] = None) -> List[str]:
    '''
    Run one cutting-plane split on the training file at fixed (C, eta) and return its
    trace lines; they are also written to trace.log under `out_dir`.
    '''
    train = load_libsvm_file(cfg.train_path)
    if cfg.scale:
        train, _, _ = scale_features(train, train)
    classes = list(classes) if classes else list(range(1, train.class_count + 1))
    C = cfg.C if cfg.C is not None else 1.0
    eta = cfg.eta if cfg.eta is not None else 1.0 / max(train.feature_dim, 1)

    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, TRACE_FILE)
    handler = attach_trace_file(path)
    try:
        problem = build_node_problem(train, classes, kernel_spec(cfg.kernel, eta), C, cfg.split.beta)
        group_one, group_two, _ = split_node(problem, cfg.split)
    finally:
        detach_trace_handler(handler)
    logger.info("Root split: %s | %s", group_one, group_two)
    with open(path, 'r', encoding='utf-8') as fp:
        return fp.read().splitlines()


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report.model_dump(), indent=2, sort_keys=True)

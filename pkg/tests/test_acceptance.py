'''
Runs against the LIBSVM datasets under MSMTREE_DATA_DIR. Every test here is
skipped when the variable is unset or a file is missing.
'''
import os

import numpy as np
import pytest

from src import app_workflow
from src.data_utils.dataset_splitter import split_train_test
from src.data_utils.feature_scaler import scale_features
from src.data_utils.libsvm_processor import load_libsvm_file, load_train_test
from src.harness import train_method
from src.harness.methods import kernel_spec
from src.modals.app_data import ExperimentConfig, Method
from src.modals.svm_data import KernelKind, KernelSpec, SolverOptions
from src.solver.svm_model import decision_values, train_binary_svm
from src.tree import RandomSplitter, build_tree

pytestmark = pytest.mark.acceptance

GRID = [0.01, 0.1, 1.0, 10.0, 100.0]
TOLERANCE = 0.05
# usps stores digit d as label d + 1
CONFUSABLE_DIGITS = [(1, 7), (8, 9), (4, 6), (8, 0), (9, 0)]


def data_file(*names: str) -> str:
    for name in names:
        path = os.path.join(os.getenv('MSMTREE_DATA_DIR', ''), name)
        if os.path.isfile(path):
            return path
    pytest.skip(f"none of {names} under MSMTREE_DATA_DIR")


def vowel_files():
    return data_file('vowel.scale', 'vowel'), data_file('vowel.scale.t', 'vowel.t')


def test_svmguide4_shape():
    dataset = load_libsvm_file(data_file('svmguide4'))
    assert (dataset.size, dataset.class_count, dataset.feature_dim) == (300, 6, 10)


def test_vowel_split_at_the_published_ratio():
    train_path, test_path = vowel_files()
    train, test = load_train_test(train_path, test_path)
    pooled = app_workflow._pooled(ExperimentConfig(train_path=train_path, test_path=test_path))
    assert pooled.size == train.size + test.size == 990
    part_train, part_test = split_train_test(pooled, 528 / 990, seed=0)
    assert (part_train.size, part_test.size) == (528, 462)


def test_tree_structure_and_cost_ordering():
    train, test = load_train_test(*vowel_files())
    train, test, _ = scale_features(train, test)
    kernel = KernelSpec(kind=KernelKind.gaussian, eta=1.0)
    counts = {}
    for method in (Method.msm, Method.one_vs_rest, Method.one_vs_one):
        trained = train_method(method, train, kernel, 10.0)
        _, evals = trained.predict_batch(test.features)
        counts[method] = evals
        if method == Method.msm:
            tree = trained.model
            assert len(tree.leaves()) == 11
            assert len(tree.internal_nodes()) == 10
            assert tree.non_converged() == 0
            assert evals.max() <= 10

    assert counts[Method.msm].mean() < counts[Method.one_vs_rest].mean() < counts[Method.one_vs_one].mean()
    assert np.all(counts[Method.one_vs_rest] == 11)
    assert np.all(counts[Method.one_vs_one] == 55)


@pytest.mark.parametrize('names, kernel', [
    (('vowel.scale', 'vowel'), KernelSpec(kind=KernelKind.gaussian, eta=1.0)),
    (('svmguide4',), KernelSpec(kind=KernelKind.gaussian, eta=0.1)),
    (('segment.scale', 'segment'), KernelSpec(kind=KernelKind.linear)),
])
def test_trained_svms_satisfy_kkt_on_their_training_points(names, kernel):
    dataset = load_libsvm_file(data_file(*names))
    dataset, _, _ = scale_features(dataset, dataset)
    options = SolverOptions()
    slack = 10 * options.tol
    for k in range(1, min(dataset.class_count, 3) + 1):
        z = np.where(dataset.labels == k, 1.0, -1.0)
        model = train_binary_svm(dataset.features, z, kernel, 10.0, options=options)
        assert model.converged
        alpha = np.zeros(dataset.size)
        alpha[model.support_refs] = model.alpha
        margins = z * decision_values(model, dataset.features)
        support = alpha > 0
        assert np.all(np.abs(margins[support] - 1.0 + alpha[support] / model.C) <= slack)
        assert np.all(margins[~support] >= 1.0 - slack)


def test_balanced_random_tree_on_eight_classes():
    train = app_workflow.restrict_classes(load_libsvm_file(data_file('vowel.scale', 'vowel')), 8)
    tree = build_tree(train, KernelSpec(kind=KernelKind.linear), 1.0, RandomSplitter(seed=0))
    assert tree.depth == 3
    assert all(len(node.path) == 3 for node in tree.leaves())


@pytest.mark.parametrize('dataset, kernel, targets', [
    ('vowel', KernelKind.gaussian, {Method.msm: 0.9142, Method.one_vs_one: 0.8798, Method.one_vs_rest: 0.8367}),
    ('svmguide4', KernelKind.gaussian, {Method.msm: 0.7751, Method.one_vs_one: 0.8045}),
    ('segment', KernelKind.linear, {Method.msm: 0.9322, Method.one_vs_rest: 0.9213}),
])
def test_accuracy_reproduction(dataset, kernel, targets, tmp_path):
    if dataset == 'vowel':
        train_path, test_path = vowel_files()
        fraction = 528 / 990
    elif dataset == 'svmguide4':
        train_path, test_path = data_file('svmguide4'), data_file('svmguide4.t')
        fraction = 300 / 612
    else:
        train_path, test_path = data_file('segment.scale', 'segment'), None
        fraction = 0.5

    cfg = ExperimentConfig(train_path=train_path, test_path=test_path, train_fraction=fraction,
                           kernel=kernel, C_grid=GRID, eta_grid=GRID, out_dir=str(tmp_path))
    methods = list(targets) + [Method.random_tree]
    table = app_workflow.compare(cfg, methods, repeats=7).set_index('method')

    for method, target in targets.items():
        assert table.loc[method.value, 'accuracy_mean'] >= target - TOLERANCE
    assert table.loc['msm', 'accuracy_mean'] >= table.loc['random-tree', 'accuracy_mean']


def test_usps_tree_groups_confusable_digits():
    dataset = load_libsvm_file(data_file('usps'))
    if dataset.size > 1000:
        dataset, _ = split_train_test(dataset, 1000 / dataset.size, seed=0)
    dataset, _, _ = scale_features(dataset, dataset)
    trained = train_method(Method.msm, dataset, kernel_spec(KernelKind.gaussian, 1.0 / dataset.feature_dim), 10.0)
    tree = trained.model

    internal = {int(dataset.label_map.index(float(d + 1))) + 1: d for d in range(10)}
    deep_groups = [
        {internal[k] for k in node.classes}
        for node in tree.internal_nodes() if len(node.path) >= 2
    ]
    grouped = [pair for pair in CONFUSABLE_DIGITS if any(set(pair) <= group for group in deep_groups)]
    assert len(grouped) >= 2, grouped


def test_repeated_runs_are_identical(tmp_path):
    train_path, test_path = data_file('svmguide4'), data_file('svmguide4.t')
    reports = []
    for name in ('first', 'second'):
        cfg = ExperimentConfig(train_path=train_path, test_path=test_path, kernel=KernelKind.gaussian,
                               C=10.0, eta=0.1, out_dir=str(tmp_path / name))
        reports.append(app_workflow.run_experiment(cfg).deterministic_dump())
    assert reports[0] == reports[1]


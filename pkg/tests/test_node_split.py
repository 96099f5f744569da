import re

import numpy as np
import pytest

from src.errors import InfeasibleBalanceError, LeafReachedError, OracleGuardError
from src.modals.split_data import CompressedLabel, LabelAffinityMatrix, SplitOptions
from src.modals.svm_data import KernelKind, KernelSpec, SolverOptions
from src.msm.brute_force import enumerate_bipartitions, msm0_brute_force, partition_margin
from src.msm.node_split import build_node_problem, cut_budget, default_beta, split_node
from src.msm.simple_mkl import simple_mkl
from src.solver.svm_model import margin_objective, train_binary_svm
from src.utils.logger import attach_trace_file, detach_trace_handler

from conftest import make_dataset, planted_clusters

LINEAR = KernelSpec(kind=KernelKind.linear)
TRACE_LINE = re.compile(r"^node=(\S+) iter=(\d+) active=(\d+) objective=(\S+) violation=(\S+)$")


def _problem(dataset, classes=None, C=1.0, kernel=LINEAR, beta=None):
    classes = classes or list(range(1, dataset.class_count + 1))
    return build_node_problem(dataset, classes, kernel, C, beta)


def test_default_beta_and_budget():
    assert default_beta(24) == 8.0
    assert default_beta(25) == 9.0
    assert cut_budget(2, 50) == 1
    assert cut_budget(4, 50) == 7
    assert cut_budget(10, 50) == 50


def test_node_problem_collects_its_classes(four_clusters):
    problem = _problem(four_clusters, [3, 1])
    assert problem.classes == [1, 3]
    assert problem.size == 12
    assert problem.class_sizes.tolist() == [6, 6]
    assert set(four_clusters.labels[problem.instance_index].tolist()) == {1, 3}
    assert problem.raw_features is not None and problem.features is None


def test_leaf_and_infeasible_balance(three_clusters):
    with pytest.raises(LeafReachedError, match="leaf reached"):
        _problem(three_clusters, [2])
    with pytest.raises(InfeasibleBalanceError):
        _problem(three_clusters, beta=0.0)


def test_default_beta_is_raised_to_the_floor():
    points = np.vstack([np.full((10, 2), -1.0), np.full((1, 2), 1.0), np.full((1, 2), 2.0)])
    dataset = make_dataset(points, [1] * 10 + [2, 3])
    assert _problem(dataset).beta == 8.0


def test_two_classes_split_in_one_cut(four_clusters):
    group_one, group_two, state = split_node(_problem(four_clusters, [2, 4]))
    assert (group_one, group_two) == ([2], [4])
    assert len(state.active_set) == 1
    assert len(state.history) == 1
    assert state.mu.tolist() == [1.0]


def test_four_clusters_split_along_the_gap(four_clusters):
    group_one, group_two, state = split_node(_problem(four_clusters))
    assert (group_one, group_two) == ([1, 2], [3, 4])
    assert state.mu.sum() == pytest.approx(1.0, abs=1e-12)


def test_rotated_and_mirrored_data_split_the_same(four_clusters):
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    points = four_clusters.features.toarray()
    for transformed in (points @ rotation.T, -points):
        dataset = make_dataset(transformed, four_clusters.labels)
        assert split_node(_problem(dataset))[:2] == ([1, 2], [3, 4])


def test_three_clusters_split_off_the_lone_class(three_clusters):
    assert split_node(_problem(three_clusters))[:2] == ([1], [2, 3])


def test_gaussian_kernel_split_is_a_bipartition(five_clusters):
    spec = KernelSpec(kind=KernelKind.gaussian, eta=0.05)
    group_one, group_two, _ = split_node(_problem(five_clusters, kernel=spec))
    assert group_one and group_two
    assert sorted(group_one + group_two) == [1, 2, 3, 4, 5]
    assert 1 in group_one


def test_cut_objectives_never_increase(five_clusters):
    _, _, state = split_node(_problem(five_clusters), SplitOptions(tol_violation=1e-6))
    objectives = np.array([record.objective for record in state.history])
    assert np.all(np.diff(objectives) <= 1e-8 * np.abs(objectives[:-1]) + 1e-12)
    for record in state.history[:-1]:
        assert record.violation is not None


def test_affinity_has_unit_diagonal_and_is_psd(five_clusters):
    _, _, state = split_node(_problem(five_clusters), SplitOptions(tol_violation=1e-6))
    affinity = LabelAffinityMatrix.from_labels(state.active_set, state.mu)
    assert np.all(np.diag(affinity.values) == 1.0)
    assert np.linalg.eigvalsh(affinity.values)[0] >= -1e-10


def test_flipping_a_label_changes_nothing(four_clusters):
    problem = _problem(four_clusters)
    labels = [CompressedLabel(signs=(1, 1, -1, -1)), CompressedLabel(signs=(1, -1, 1, -1))]
    flipped = [labels[0], CompressedLabel(signs=(-1, 1, -1, 1))]
    first = simple_mkl(problem, labels, inner_tol=1e-10)
    second = simple_mkl(problem, flipped, inner_tol=1e-10)
    assert second.objective == pytest.approx(first.objective, rel=1e-8)
    assert np.allclose(
        LabelAffinityMatrix.from_labels(labels, first.mu).values,
        LabelAffinityMatrix.from_labels(flipped, second.mu).values,
        atol=1e-6
    )


def test_trace_lines(four_clusters, tmp_path):
    path = tmp_path / 'trace.log'
    handler = attach_trace_file(str(path))
    try:
        _, _, state = split_node(_problem(four_clusters), node_path='L')
    finally:
        detach_trace_handler(handler)

    lines = path.read_text().splitlines()
    assert len(lines) == len(state.history)
    for k, line in enumerate(lines, start=1):
        match = TRACE_LINE.match(line)
        assert match is not None, line
        assert match.group(1) == 'L'
        assert int(match.group(2)) == k
        float(match.group(4))
    assert lines[0].split()[2] == 'active=1'


def test_bipartition_enumeration_sizes():
    assert enumerate_bipartitions([1, 2]) == [([1], [2])]
    partitions = enumerate_bipartitions([1, 2, 3, 4])
    assert len(partitions) == 7
    assert all(1 in group_one for group_one, _ in partitions)


def test_brute_force_tables(four_clusters):
    pair = msm0_brute_force(_problem(four_clusters, [1, 3]), max_workers=1)
    assert len(pair.table) == 1
    assert (pair.group_one, pair.group_two) == ([1], [3])

    result = msm0_brute_force(_problem(four_clusters), max_workers=2)
    assert len(result.table) == 7
    assert (result.group_one, result.group_two) == ([1, 2], [3, 4])
    others = [margin for group_one, _, margin in result.table if group_one != [1, 2]]
    assert result.margin > max(others)


def test_verbatim_margin_rewards_collapsed_separators(four_clusters):
    # (1, 4) against (2, 3) is an XOR arrangement: the unbiased separator shrinks to w = 0
    result = msm0_brute_force(
        _problem(four_clusters), SolverOptions(tol=1e-10), max_workers=1, include_slack=False
    )
    assert result.group_one == [1, 4]
    target = next(margin for group_one, _, margin in result.table if group_one == [1, 2])
    assert result.margin > 1e3 * target


def test_verbatim_score_is_the_margin_objective(four_clusters):
    options = SolverOptions(tol=1e-10, max_iter=5000)
    problem = _problem(four_clusters)
    z = np.where(four_clusters.labels <= 2, 1.0, -1.0)
    model = train_binary_svm(four_clusters.features, z, LINEAR, C=1.0, options=options)
    verbatim = partition_margin(problem, [1, 2], options, include_slack=False)
    assert verbatim == pytest.approx(margin_objective(model), rel=1e-6)


def test_slack_term_separates_the_two_scores(four_clusters):
    options = SolverOptions(tol=1e-10, max_iter=5000)
    problem = _problem(four_clusters)
    z = np.where(four_clusters.labels <= 2, 1.0, -1.0)
    model = train_binary_svm(four_clusters.features, z, LINEAR, C=1.0, options=options)
    slack = float(model.alpha @ model.alpha) / model.C
    assert slack > 0
    verbatim = partition_margin(problem, [1, 2], options, include_slack=False)
    aware = partition_margin(problem, [1, 2], options)
    assert aware < verbatim
    assert 2.0 / aware == pytest.approx(2.0 / verbatim + slack, rel=1e-6)


def test_brute_force_is_worker_count_independent(five_clusters):
    problem = _problem(five_clusters)
    serial = msm0_brute_force(problem, max_workers=1)
    pooled = msm0_brute_force(problem, max_workers=4)
    assert serial.table == pooled.table


def test_brute_force_argmax_survives_rescaling(five_clusters):
    t = 4.0
    scaled = make_dataset(five_clusters.features.toarray() * t, five_clusters.labels)
    base = msm0_brute_force(_problem(five_clusters, C=2.0), SolverOptions(tol=1e-10))
    rescaled = msm0_brute_force(_problem(scaled, C=2.0 / t ** 2), SolverOptions(tol=1e-10))
    assert (rescaled.group_one, rescaled.group_two) == (base.group_one, base.group_two)
    for (_, _, a), (_, _, b) in zip(base.table, rescaled.table):
        assert b == pytest.approx(a * t ** 2, rel=1e-5)


def test_brute_force_guard():
    dataset = make_dataset(np.eye(16), list(range(1, 17)))
    with pytest.raises(OracleGuardError, match="15"):
        msm0_brute_force(_problem(dataset))


def _planted_gap(rng, class_count):
    order = rng.permutation(class_count)
    size_a = (class_count + 1) // 2
    groups = (order[:size_a], order[size_a:])
    centers = [None] * class_count
    for x, members in zip((-5.0, 5.0), groups):
        spacing = rng.uniform(0.8, 1.5)
        for j, k in enumerate(members):
            centers[k] = (x, (j - (len(members) - 1) / 2) * spacing)
    per_class = int(rng.integers(4, 7))
    return planted_clusters(centers, per_class, noise=0.2, seed=int(rng.integers(1 << 30)))


def test_relaxation_agrees_with_brute_force_on_planted_gaps():
    rng = np.random.default_rng(2024)
    agreed = 0
    trials = 50
    for _ in range(trials):
        dataset = _planted_gap(rng, int(rng.integers(3, 6)))
        problem = _problem(dataset)
        split = split_node(problem)[:2]
        oracle = msm0_brute_force(problem, max_workers=1)
        agreed += split == (oracle.group_one, oracle.group_two)
    assert agreed / trials >= 0.8


def test_off_origin_clusters_split_along_the_gap():
    # every class sits at x >= 0, so separators through the origin are squeezed
    centers = [(0.0, 0.0), (0.0, 1.0), (10.0, 0.0), (10.0, 1.0)]
    dataset = planted_clusters(centers, per_class=6, noise=0.1, seed=1)
    problem = _problem(dataset)
    assert split_node(problem)[:2] == ([1, 2], [3, 4])
    oracle = msm0_brute_force(problem, max_workers=1)
    gap = next(margin for group_one, _, margin in oracle.table if group_one == [1, 2])
    assert gap >= 0.98 * oracle.margin

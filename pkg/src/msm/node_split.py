import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import InfeasibleBalanceError, LeafReachedError, SearchExhaustedError
from src.kernels import explicit_features, gram
from src.modals.dataset_data import SparseDataset
from src.modals.split_data import (
    CompressedLabel,
    CutRecord,
    LabelAffinityMatrix,
    NodeProblem,
    SplitOptions,
    SplitState,
)
from src.modals.svm_data import KernelKind, KernelSpec
from src.msm.graph_cut import extract_partition
from src.msm.simple_mkl import simple_mkl
from src.msm.violated_label import min_imbalance, most_violated_label
from src.utils.logger import get_module_logger, get_trace_logger

logger = get_module_logger(__name__)
trace = get_trace_logger()


def default_beta(instance_count: int) -> float:
    return float(math.ceil(instance_count / 3))


def build_node_problem(
    dataset: SparseDataset,
    classes: Sequence[int],
    kernel: KernelSpec,
    C: float,
    beta: Optional[float] = None
) -> NodeProblem:
    '''
    Collect the instances of `classes` and their kernel. A given `beta` below the
    smallest reachable imbalance is an error; the default is raised to it instead.
    '''
    classes = sorted(int(k) for k in classes)
    if len(classes) < 2:
        raise LeafReachedError(f"leaf reached: node holds {len(classes)} class")

    rows = np.flatnonzero(np.isin(dataset.labels, classes))
    position = {k: p for p, k in enumerate(classes)}
    instance_classes = np.asarray([position[int(k)] for k in dataset.labels[rows]], dtype=np.int64)
    class_sizes = np.bincount(instance_classes, minlength=len(classes))

    floor, _ = min_imbalance(class_sizes)
    if beta is None:
        beta = max(default_beta(rows.size), floor)
    elif beta < floor:
        raise InfeasibleBalanceError(
            f"beta {beta:g} is below the smallest achievable imbalance {floor:g}"
        )

    node_gram = gram(kernel, dataset, rows)
    node_features = None
    raw = None
    if kernel.kind == KernelKind.gaussian:
        node_features = explicit_features(node_gram)
    else:
        raw = dataset.features[rows].tocsr()

    return NodeProblem(
        classes=classes,
        instance_index=rows,
        instance_classes=instance_classes,
        class_sizes=class_sizes,
        gram=node_gram,
        features=node_features,
        raw_features=raw,
        C=C,
        beta=float(beta)
    )


def label_objective(problem: NodeProblem, alpha: np.ndarray, label: CompressedLabel) -> float:
    '''J(alpha, z) = 1'a - 1/2 a'(K ⊙ zz' + I/C)a for the expanded labeling z.'''
    signed = alpha * label.expand(problem.instance_classes)
    quadratic = float(signed @ problem.gram.values @ signed)
    return float(alpha.sum() - 0.5 * quadratic - 0.5 * float(alpha @ alpha) / problem.C)


def cut_budget(class_count: int, max_cuts: int) -> int:
    # number of distinct bipartitions caps the active set
    if class_count - 1 >= 62:
        return max_cuts
    return min(2 ** (class_count - 1) - 1, max_cuts)


def _trace_line(node_path: str, record: CutRecord) -> str:
    violation = 'none' if record.violation is None else f"{record.violation:.10g}"
    return (
        f"node={node_path or 'root'} iter={record.iteration} active={record.active} "
        f"objective={record.objective:.10g} violation={violation}"
    )


def split_node(
    problem: NodeProblem,
    options: SplitOptions | None = None,
    node_path: str = ''
) -> Tuple[List[int], List[int], SplitState]:
    '''
    Cutting-plane search over balanced labelings of the node's classes. Each round
    re-optimizes the kernel weights of the active labelings, then adds the most
    violated labeling for the resulting dual. The weighted label matrix of the
    final round is cut into two class groups.
    '''
    options = options or SplitOptions()
    if problem.class_count < 2:
        raise LeafReachedError("leaf reached: a single class cannot be split")
    floor, _ = min_imbalance(problem.class_sizes)
    if problem.beta < floor:
        raise InfeasibleBalanceError(
            f"beta {problem.beta:g} is below the smallest achievable imbalance {floor:g}"
        )

    budget = cut_budget(problem.class_count, options.max_cuts)
    alpha = np.full(problem.size, 1.0 / problem.size)
    state = SplitState(alpha=alpha)
    state.active_set.append(most_violated_label(problem, alpha))

    mu = np.ones(1)
    iteration = 0
    while True:
        iteration += 1
        result = simple_mkl(
            problem,
            state.active_set,
            warm_alpha=state.alpha if iteration > 1 else None,
            tol=options.mkl_tol,
            mu=mu,
            inner_tol=options.inner_tol,
            max_iter=options.max_mkl_iter,
            seed=options.seed
        )
        state.mu = result.mu
        state.alpha = result.alpha
        state.theta = -result.objective
        state.converged = state.converged and result.converged

        record = CutRecord(iteration=iteration, active=len(state.active_set), objective=result.objective)
        state.history.append(record)

        if len(state.active_set) >= budget:
            trace.info(_trace_line(node_path, record))
            break
        try:
            candidate = most_violated_label(problem, state.alpha, exclude=state.active_set)
        except SearchExhaustedError:
            trace.info(_trace_line(node_path, record))
            break

        record.violation = -label_objective(problem, state.alpha, candidate)
        trace.info(_trace_line(node_path, record))
        if record.violation <= state.theta + options.tol_violation * abs(state.theta):
            break

        state.active_set.append(candidate)
        # the new labeling enters with zero weight, so the restricted optimum can only drop
        mu = np.append(state.mu, 0.0)

    affinity = LabelAffinityMatrix.from_labels(state.active_set, state.mu)
    group_one, group_two = extract_partition(
        affinity, problem.classes, class_sizes=problem.class_sizes, beta=problem.beta
    )
    if not state.converged:
        logger.warning("Split of node %s used an unconverged SimpleMKL solve", node_path or 'root')
    logger.info(
        "Split node %s: %s | %s after %d cuts (objective %.6g)",
        node_path or 'root', group_one, group_two, len(state.active_set), -state.theta
    )
    return group_one, group_two, state

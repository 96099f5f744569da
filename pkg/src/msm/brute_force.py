from typing import List, Tuple

import numpy as np

from src.errors import LeafReachedError, OracleGuardError
from src.modals.split_data import BruteForceResult, MSM0_CLASS_GUARD, NodeProblem
from src.modals.svm_data import SolverOptions
from src.solver.dual_cd import solve_dual
from src.solver.kernel_views import SignedGramView
from src.solver.svm_model import margin_from_norm
from src.tasks.fit_task import CallableTask
from src.tasks.task_executor import FitTaskExecutor
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def enumerate_bipartitions(classes: List[int]) -> List[Tuple[List[int], List[int]]]:
    '''All 2^(c-1) - 1 unordered bipartitions; the first class always sits in the first group.'''
    count = len(classes)
    partitions = []
    for mask in range(1, 2 ** (count - 1)):
        group_two = [classes[k + 1] for k in range(count - 1) if mask >> k & 1]
        group_one = [k for k in classes if k not in group_two]
        partitions.append((group_one, group_two))
    return partitions


def partition_margin(
    problem: NodeProblem,
    group_one: List[int],
    options: SolverOptions,
    include_slack: bool = True
) -> float:
    '''
    Separating margin of the unbiased SVM with group_one (+1) against the rest (-1).

    Without `include_slack` this is `margin_objective` of that SVM, 2 / ||w||^2.
    With it the score is 2 / (||w||^2 + C sum xi^2), the inverse of the optimal
    primal value. The L2 loss keeps every support instance at xi = alpha / C > 0, so
    the two scores differ on every partition; only the slack-aware one stays finite
    when w collapses on a bipartition no hyperplane through the origin can split.
    '''
    members = set(group_one)
    signs = np.asarray([1.0 if k in members else -1.0 for k in problem.classes])
    z = signs[problem.instance_classes]
    solution = solve_dual(SignedGramView(problem.gram.values, z, problem.C), options)
    signed = solution.alpha * z
    norm = float(signed @ problem.gram.values @ signed)
    if include_slack:
        # L2 loss: xi_j = alpha_j / C at the optimum
        norm += float(solution.alpha @ solution.alpha) / problem.C
    return margin_from_norm(norm)


def msm0_brute_force(
    problem: NodeProblem,
    options: SolverOptions | None = None,
    max_workers: int | None = None,
    include_slack: bool = True
) -> BruteForceResult:
    '''
    Exhaustive maximum-margin split: train one SVM per bipartition and keep the widest.
    Ties go to the lexicographically smallest first group.
    '''
    count = problem.class_count
    if count < 2:
        raise LeafReachedError("leaf reached: a single class cannot be split")
    if count > MSM0_CLASS_GUARD:
        raise OracleGuardError(
            f"exhaustive split of {count} classes needs {2 ** (count - 1) - 1} SVM solves; "
            f"the limit is {MSM0_CLASS_GUARD} classes"
        )

    options = options or SolverOptions()
    partitions = enumerate_bipartitions(list(problem.classes))
    executor = FitTaskExecutor(max_workers)
    for group_one, group_two in partitions:
        executor.add_task(CallableTask(
            (tuple(group_one),), partition_margin, problem, group_one, options, include_slack
        ))
    executor.run_tasks()

    margins = {result.key[0]: result.value for result in executor.fetch_results()}
    table = [(group_one, group_two, margins[tuple(group_one)]) for group_one, group_two in partitions]
    best = min(table, key=lambda row: (-row[2], row[0]))
    logger.info("Exhaustive split over %d partitions: %s | %s (J=%.6g)", len(table), best[0], best[1], best[2])
    return BruteForceResult(group_one=best[0], group_two=best[1], margin=best[2], table=table)

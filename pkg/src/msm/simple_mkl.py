from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.modals.split_data import CompressedLabel, MklResult, NodeProblem
from src.modals.svm_data import SolverOptions
from src.solver.dual_cd import solve_dual
from src.solver.kernel_views import CombinedKernelView
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

MAX_HALVINGS = 20


def expand_labels(problem: NodeProblem, labels: List[CompressedLabel]) -> List[np.ndarray]:
    return [label.expand(problem.instance_classes) for label in labels]


def project_to_simplex(values: np.ndarray) -> np.ndarray:
    '''Euclidean projection onto {mu | sum(mu) = 1, mu >= 0}.'''
    n = len(values)
    ordered = -np.sort(-values)
    thresholds = (np.cumsum(ordered) - 1) / np.arange(1, n + 1)
    for k in range(n - 1, -1, -1):
        if ordered[k] > thresholds[k]:
            return np.maximum(values - thresholds[k], 0.0)
    return np.full(n, 1.0 / n)


def _renormalize(mu: np.ndarray) -> np.ndarray:
    mu = np.maximum(mu, 0.0)
    return mu / mu.sum()


class MklObjective:
    '''
    J(mu) = max_alpha -1/2 a'(sum_k mu_k K ⊙ z^k z^k' + I/C)a + 1'a with memoized
    inner solves. Gradient by Danskin: dJ/dmu_k = -1/2 a*'(K ⊙ z^k z^k')a*.
    '''

    def __init__(self, problem: NodeProblem, labels: List[CompressedLabel], inner_tol: float, seed: int = 0):
        self.problem = problem
        self.labelings = expand_labels(problem, labels)
        self.solver_options = SolverOptions(tol=inner_tol, seed=seed)
        self.converged = True

    def view(self, mu: np.ndarray) -> CombinedKernelView:
        return CombinedKernelView(self.problem.gram.values, self.labelings, mu, self.problem.C)

    def evaluate(self, mu: np.ndarray, warm_alpha: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
        solution = solve_dual(self.view(mu), self.solver_options, warm_alpha)
        if not solution.converged:
            self.converged = False
        return solution.objective, solution.alpha

    def gradient(self, mu: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        return -0.5 * self.view(mu).base_quadratic(alpha)


def reduced_descent_direction(mu: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    '''
    Descent direction of the reduced gradient on the simplex, pivoting on the
    largest weight (ties to the smallest index).
    '''
    pivot = int(np.argmax(mu))
    reduced = gradient - gradient[pivot]
    direction = -reduced
    # a weight at zero cannot decrease further
    direction[(mu <= 0.0) & (reduced > 0.0)] = 0.0
    direction[pivot] = 0.0
    direction[pivot] = -direction.sum()
    return direction


def _max_step(mu: np.ndarray, direction: np.ndarray) -> float:
    shrinking = direction < 0
    if not shrinking.any():
        return 0.0
    return float(np.min(-mu[shrinking] / direction[shrinking]))


def _move(mu: np.ndarray, direction: np.ndarray, gamma: float, gamma_max: float) -> np.ndarray:
    moved = mu + gamma * direction
    if gamma == gamma_max:
        # the limiting weight lands exactly on zero
        moved[(direction < 0) & (np.abs(moved) <= 1e-15)] = 0.0
    return project_to_simplex(moved)


def simple_mkl(
    problem: NodeProblem,
    labels: List[CompressedLabel],
    warm_alpha: Optional[np.ndarray] = None,
    tol: float = 1e-5,
    mu: Optional[np.ndarray] = None,
    inner_tol: float = 1e-7,
    max_iter: int = 100,
    seed: int = 0
) -> MklResult:
    '''
    Minimize J(mu) over the simplex by alternating an SVM solve at fixed mu with a
    reduced-gradient step on mu and a line search along the descent direction.
    `mu` warm-starts the weights (uniform when omitted).
    '''
    count = len(labels)
    if count == 0:
        raise ValueError("active label set is empty")
    mu = np.full(count, 1.0 / count) if mu is None else _renormalize(np.asarray(mu, dtype=np.float64))

    objective_fn = MklObjective(problem, labels, inner_tol, seed)
    objective, alpha = objective_fn.evaluate(mu, warm_alpha)
    history = [objective]
    mu_history = [mu.copy()]
    converged = True
    iterations = 0

    for iterations in range(1, max_iter + 1):
        gradient = objective_fn.gradient(mu, alpha)
        direction = reduced_descent_direction(mu, gradient)
        if np.linalg.norm(direction) <= tol:
            break
        gamma_max = _max_step(mu, direction)
        if gamma_max <= 0.0:
            break

        evaluations: Dict[float, Tuple[np.ndarray, float, np.ndarray]] = {}

        def along(gamma: float) -> float:
            gamma = float(gamma)
            if gamma not in evaluations:
                moved = _move(mu, direction, gamma, gamma_max)
                value, solved_alpha = objective_fn.evaluate(moved, alpha)
                evaluations[gamma] = (moved, value, solved_alpha)
            return evaluations[gamma][1]

        # J is convex in mu, hence unimodal along the segment
        search = minimize_scalar(along, bounds=(0.0, gamma_max), method='bounded',
                                 options={'xatol': 1e-3 * gamma_max})
        gamma = min([float(search.x), gamma_max], key=along)

        halvings = 0
        while along(gamma) > objective and halvings < MAX_HALVINGS:
            gamma /= 2.0
            halvings += 1
        if along(gamma) > objective:
            predicted = abs(float(gradient @ direction)) * gamma_max
            if predicted > tol * max(1.0, abs(objective)):
                logger.info("MKL line search failed after %d halvings", MAX_HALVINGS)
                converged = False
            break

        previous_mu = mu
        mu, new_objective, alpha = evaluations[gamma]
        history.append(new_objective)
        mu_history.append(mu.copy())
        change = abs(objective - new_objective)
        objective = new_objective
        if change <= tol * max(1.0, abs(objective)) or np.linalg.norm(mu - previous_mu) <= tol:
            break
    else:
        converged = False

    converged = converged and objective_fn.converged
    logger.debug("SimpleMKL: %d iterations, objective %.8g, mu %s", iterations, objective, np.round(mu, 4))
    return MklResult(
        mu=mu,
        alpha=alpha,
        objective=objective,
        converged=converged,
        iterations=iterations,
        objective_history=history,
        mu_history=mu_history
    )

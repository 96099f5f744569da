from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, solve

from src.modals.svm_data import DualSolution, SolverOptions
from src.solver.kernel_views import KernelView, LinearView
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

POLISH_LIMIT = 1500  # largest support set solved directly


def projected_gradient(grad: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    '''KKT residual of the nonnegativity-constrained dual, coordinate-wise.'''
    return np.where(alpha > 0, grad, np.minimum(grad, 0.0))


def _initial_alpha(n: int, warm_alpha: Optional[np.ndarray]) -> np.ndarray:
    if warm_alpha is None:
        return np.zeros(n)
    alpha = np.maximum(np.asarray(warm_alpha, dtype=np.float64), 0.0)
    if alpha.shape != (n,):
        raise ValueError(f"warm start has shape {alpha.shape}, expected ({n},)")
    return alpha.copy()


def _support_block(view: KernelView | LinearView, support: np.ndarray) -> np.ndarray:
    '''Q restricted to rows and columns `support`.'''
    if isinstance(view, LinearView):
        rows = view.features[support]
        z = view.z[support]
        block = (rows @ rows.T).toarray() * np.outer(z, z)
        block[np.diag_indices_from(block)] += 1.0 / view.C
        return block
    return np.vstack([view.row(int(i))[support] for i in support])


def polish_support(view: KernelView | LinearView, alpha: np.ndarray) -> bool:
    '''
    Step from alpha towards the maximizer over its current support, Q_SS a_S = 1,
    as far as nonnegativity allows. The dual is a concave quadratic on that segment
    with its peak at the far end, so the step never lowers the objective.
    Returns False when alpha was left untouched.
    '''
    support = np.flatnonzero(alpha > 0)
    if len(support) == 0 or len(support) > POLISH_LIMIT:
        return False
    try:
        target = solve(_support_block(view, support), np.ones(len(support)), assume_a='pos')
    except (LinAlgError, ValueError):
        return False

    current = alpha[support]
    crossing = target < 0
    step = 1.0
    blocking = np.array([], dtype=np.int64)
    if crossing.any():
        ratios = current[crossing] / (current[crossing] - target[crossing])
        step = min(1.0, float(ratios.min()))
        blocking = np.flatnonzero(crossing)[ratios <= step]
    moved = np.maximum(current + step * (target - current), 0.0)
    moved[blocking] = 0.0
    alpha[support] = moved
    return True


def _solve_kernel_view(view: KernelView, options: SolverOptions, alpha: np.ndarray) -> DualSolution:
    n = view.n
    q_diag = view.diag()
    grad = view.matvec(alpha) - 1.0
    rng = np.random.default_rng(options.seed)
    history = []
    converged = False
    violation = float('inf')
    last_support = None

    sweeps = 0
    for sweeps in range(1, options.sweep_cap(n) + 1):
        sweep_violation = 0.0
        for i in rng.permutation(n):
            g = grad[i]
            pg = g if alpha[i] > 0 else min(g, 0.0)
            if pg == 0.0:
                continue
            sweep_violation = max(sweep_violation, abs(pg))
            updated = max(alpha[i] - g / q_diag[i], 0.0)
            delta = updated - alpha[i]
            if delta != 0.0:
                alpha[i] = updated
                grad += delta * view.row(i)
        if options.polish and sweep_violation > options.tol:
            support = alpha > 0
            if last_support is None or not np.array_equal(support, last_support):
                last_support = support
                if polish_support(view, alpha):
                    grad = view.matvec(alpha) - 1.0
        history.append(0.5 * (alpha.sum() - alpha @ grad))

        if sweep_violation <= options.tol:
            # confirm against a fresh gradient, which also clears accumulated drift
            grad = view.matvec(alpha) - 1.0
            violation = float(np.max(np.abs(projected_gradient(grad, alpha)), initial=0.0))
            if violation <= options.tol:
                converged = True
                break

    if not converged:
        grad = view.matvec(alpha) - 1.0
        violation = float(np.max(np.abs(projected_gradient(grad, alpha)), initial=0.0))
        logger.debug("Dual solve stopped after %d sweeps, KKT violation %.3e", sweeps, violation)

    return DualSolution(
        alpha=alpha,
        objective=0.5 * float(alpha.sum() - alpha @ grad),
        converged=converged,
        sweeps=sweeps,
        kkt_violation=violation,
        history=history
    )


def _linear_gradient(view: LinearView, alpha: np.ndarray, w: np.ndarray) -> np.ndarray:
    margins = np.asarray(view.features @ w).ravel()
    return view.z * margins + alpha / view.C - 1.0


def _solve_linear_view(view: LinearView, options: SolverOptions, alpha: np.ndarray) -> DualSolution:
    n = view.n
    features = view.features
    indptr, indices, data = features.indptr, features.indices, features.data
    q_diag = view.diag()
    z = view.z
    w = view.weights(alpha)
    rng = np.random.default_rng(options.seed)
    history = []
    converged = False
    violation = float('inf')
    last_support = None

    sweeps = 0
    for sweeps in range(1, options.sweep_cap(n) + 1):
        sweep_violation = 0.0
        for i in rng.permutation(n):
            start, end = indptr[i], indptr[i + 1]
            columns = indices[start:end]
            values = data[start:end]
            g = z[i] * (w[columns] @ values) + alpha[i] / view.C - 1.0
            pg = g if alpha[i] > 0 else min(g, 0.0)
            if pg == 0.0:
                continue
            sweep_violation = max(sweep_violation, abs(pg))
            updated = max(alpha[i] - g / q_diag[i], 0.0)
            delta = updated - alpha[i]
            if delta != 0.0:
                alpha[i] = updated
                w[columns] += delta * z[i] * values
        if options.polish and sweep_violation > options.tol:
            support = alpha > 0
            if last_support is None or not np.array_equal(support, last_support):
                last_support = support
                if polish_support(view, alpha):
                    w = view.weights(alpha)
        history.append(float(-0.5 * w @ w - 0.5 * alpha @ alpha / view.C + alpha.sum()))

        if sweep_violation <= options.tol:
            w = view.weights(alpha)
            grad = _linear_gradient(view, alpha, w)
            violation = float(np.max(np.abs(projected_gradient(grad, alpha)), initial=0.0))
            if violation <= options.tol:
                converged = True
                break

    if not converged:
        w = view.weights(alpha)
        grad = _linear_gradient(view, alpha, w)
        violation = float(np.max(np.abs(projected_gradient(grad, alpha)), initial=0.0))
        logger.debug("Linear dual solve stopped after %d sweeps, KKT violation %.3e", sweeps, violation)

    return DualSolution(
        alpha=alpha,
        objective=float(-0.5 * w @ w - 0.5 * alpha @ alpha / view.C + alpha.sum()),
        converged=converged,
        sweeps=sweeps,
        kkt_violation=violation,
        history=history
    )


def solve_dual(
    view: KernelView | LinearView,
    options: SolverOptions | None = None,
    warm_alpha: Optional[np.ndarray] = None
) -> DualSolution:
    '''
    Coordinate-wise maximizer of -1/2 a'Qa + 1'a over a >= 0 for any kernel view.
    Each coordinate step is exact, so the objective never decreases. After a sweep
    that changed the support set, `polish_support` jumps to the optimum over that
    set when it is feasible. Hitting the sweep cap returns the last iterate with
    converged=False.
    '''
    options = options or SolverOptions()
    alpha = _initial_alpha(view.n, warm_alpha)
    if isinstance(view, LinearView):
        return _solve_linear_view(view, options, alpha)
    return _solve_kernel_view(view, options, alpha)

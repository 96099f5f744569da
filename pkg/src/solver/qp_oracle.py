import numpy as np


def dense_dual_oracle(Q: np.ndarray, max_iter: int = 200000, tol: float = 1e-13) -> tuple[np.ndarray, float]:
    '''
    Reference maximizer of -1/2 a'Qa + 1'a over a >= 0 by accelerated projected
    gradient on the dense matrix. Slow and only meant for small checks.
    '''
    n = Q.shape[0]
    lipschitz = float(np.linalg.eigvalsh(Q)[-1])
    step = 1.0 / lipschitz
    alpha = np.zeros(n)
    momentum = alpha.copy()
    t = 1.0
    for _ in range(max_iter):
        gradient = 1.0 - Q @ momentum
        updated = np.maximum(momentum + step * gradient, 0.0)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        momentum = updated + ((t - 1.0) / t_next) * (updated - alpha)
        change = float(np.max(np.abs(updated - alpha)))
        alpha = updated
        t = t_next
        if change < tol:
            break
    objective = float(-0.5 * alpha @ Q @ alpha + alpha.sum())
    return alpha, objective

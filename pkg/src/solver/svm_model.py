import math
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix

from src.errors import ModelFormatError
from src.kernels import cross_kernel, gram_from_features
from src.modals.dataset_data import SparseVector
from src.modals.kernel_data import GramMatrix
from src.modals.svm_data import BinarySvmModel, KernelKind, KernelSpec, SolverOptions
from src.solver.dual_cd import solve_dual
from src.solver.kernel_views import LinearView, SignedGramView
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

DEGENERATE_NORM = 1e-12


def _linear_weights(support_vectors: csr_matrix, alpha: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.asarray(support_vectors.T @ (alpha * z)).ravel()


def build_model(
    alpha: np.ndarray,
    z: np.ndarray,
    C: float,
    kernel: KernelSpec,
    features: csr_matrix,
    refs: Optional[np.ndarray] = None,
    converged: bool = True
) -> BinarySvmModel:
    '''Keep the support instances (alpha > 0) as copies.'''
    support = np.flatnonzero(alpha > 0)
    refs = np.arange(features.shape[0]) if refs is None else np.asarray(refs)
    support_vectors = features[support].tocsr()
    weights = None
    if kernel.kind == KernelKind.linear:
        weights = _linear_weights(support_vectors, alpha[support], z[support])
    return BinarySvmModel(
        alpha=alpha[support].copy(),
        signed_labels=np.asarray(z, dtype=np.float64)[support].copy(),
        C=C,
        kernel=kernel,
        support_vectors=support_vectors,
        support_refs=refs[support].copy(),
        converged=converged,
        weights=weights
    )


def train_binary_svm(
    features: csr_matrix,
    z: np.ndarray,
    kernel: KernelSpec,
    C: float,
    refs: Optional[np.ndarray] = None,
    options: SolverOptions | None = None,
    gram: GramMatrix | None = None
) -> BinarySvmModel:
    '''Unbiased L2-loss SVM on rows `features` with labels `z` in {+1, -1}.'''
    z = np.asarray(z, dtype=np.float64)
    if kernel.kind == KernelKind.linear:
        view = LinearView(features, z, C)
    else:
        if gram is None:
            gram = gram_from_features(kernel, features)
        view = SignedGramView(gram.values, z, C)

    solution = solve_dual(view, options)
    if not solution.converged:
        logger.warning("Binary SVM did not converge (KKT violation %.3e)", solution.kkt_violation)
    return build_model(solution.alpha, z, C, kernel, features, refs, solution.converged)


def decision_values(model: BinarySvmModel, features: csr_matrix) -> np.ndarray:
    '''sum_j alpha_j z_j k(x_j, x) for every row x; no bias.'''
    n = features.shape[0]
    if model.support_size == 0:
        return np.zeros(n)
    if model.weights is not None:
        width = min(features.shape[1], model.weights.shape[0])
        return np.asarray(features[:, :width] @ model.weights[:width]).ravel()
    block = cross_kernel(model.kernel, features, model.support_vectors)
    return block @ (model.alpha * model.signed_labels)


def decision_value(model: BinarySvmModel, x: SparseVector | csr_matrix) -> float:
    row = x.to_csr() if isinstance(x, SparseVector) else x
    return float(decision_values(model, row)[0])


def weight_norm_squared(model: BinarySvmModel) -> float:
    '''||w||^2 = a'(K ⊙ zz')a over the support set.'''
    if model.support_size == 0:
        return 0.0
    if model.weights is not None:
        return float(model.weights @ model.weights)
    coefficients = model.alpha * model.signed_labels
    block = cross_kernel(model.kernel, model.support_vectors, model.support_vectors)
    return float(coefficients @ block @ coefficients)


def margin_from_norm(norm: float) -> float:
    '''2 / norm, or +inf below DEGENERATE_NORM.'''
    if norm < DEGENERATE_NORM:
        return math.inf
    return 2.0 / norm


def margin_objective(model: BinarySvmModel) -> float:
    '''Separating margin J = 2 / ||w||^2; +inf for a degenerate separator.'''
    return margin_from_norm(weight_norm_squared(model))


def model_to_dict(model: BinarySvmModel) -> dict:
    support = model.support_vectors.tocsr().copy()
    support.sort_indices()
    rows = []
    for i in range(support.shape[0]):
        start, end = support.indptr[i], support.indptr[i + 1]
        rows.append({
            'indices': [int(c) + 1 for c in support.indices[start:end]],
            'values': [float(v) for v in support.data[start:end]],
        })
    return {
        'alpha': [float(a) for a in model.alpha],
        'z': [int(s) for s in model.signed_labels],
        'C': model.C,
        'kernel': {'kind': model.kernel.kind.value, 'eta': model.kernel.eta},
        'dim': int(support.shape[1]),
        'support': rows,
        'support_refs': [int(r) for r in model.support_refs],
        'converged': model.converged,
    }


def model_from_dict(obj: dict) -> BinarySvmModel:
    try:
        kernel = KernelSpec(kind=obj['kernel']['kind'], eta=obj['kernel']['eta'])
        dim = int(obj['dim'])
        data, columns, indptr = [], [], [0]
        for row in obj['support']:
            columns.extend(i - 1 for i in row['indices'])
            data.extend(row['values'])
            indptr.append(len(columns))
        support_vectors = csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(columns, dtype=np.int64), indptr),
            shape=(len(obj['support']), dim)
        )
        alpha = np.asarray(obj['alpha'], dtype=np.float64)
        z = np.asarray(obj['z'], dtype=np.float64)
        weights = None
        if kernel.kind == KernelKind.linear:
            weights = _linear_weights(support_vectors, alpha, z)
        return BinarySvmModel(
            alpha=alpha,
            signed_labels=z,
            C=float(obj['C']),
            kernel=kernel,
            support_vectors=support_vectors,
            support_refs=np.asarray(obj.get('support_refs', []), dtype=np.int64),
            converged=bool(obj.get('converged', True)),
            weights=weights
        )
    except (KeyError, TypeError, ValueError) as error:
        raise ModelFormatError(f"malformed SVM model: {error}") from error

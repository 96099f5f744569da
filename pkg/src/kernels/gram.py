import numpy as np
from scipy.linalg import eigh
from scipy.sparse import csr_matrix, issparse
from sklearn.metrics.pairwise import linear_kernel, rbf_kernel

from src.errors import GramSizeError, KernelNotPsdError
from src.modals.app_data import load_settings
from src.modals.dataset_data import SparseDataset, SparseVector
from src.modals.kernel_data import ExplicitFeatures, GramMatrix, NOT_PSD_TOL, RANK_TOL
from src.modals.svm_data import KernelKind, KernelSpec
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def eval_kernel(spec: KernelSpec, a: SparseVector, b: SparseVector) -> float:
    '''Single kernel entry between two sparse vectors.'''
    left = dict(zip(a.indices, a.values))
    right = dict(zip(b.indices, b.values))
    if spec.kind == KernelKind.linear:
        return float(sum(value * right[i] for i, value in left.items() if i in right))

    squared = 0.0
    for i in set(left) | set(right):
        diff = left.get(i, 0.0) - right.get(i, 0.0)
        squared += diff * diff
    return float(np.exp(-spec.eta * squared))


def cross_kernel(spec: KernelSpec, rows: csr_matrix, columns: csr_matrix) -> np.ndarray:
    '''Dense kernel block k(rows_i, columns_j).'''
    width = max(rows.shape[1], columns.shape[1])
    rows = _pad(rows, width)
    columns = _pad(columns, width)
    if spec.kind == KernelKind.linear:
        return np.asarray(linear_kernel(rows, columns), dtype=np.float64)
    return np.asarray(rbf_kernel(rows, columns, gamma=spec.eta), dtype=np.float64)


def _pad(features, width: int):
    if issparse(features) and features.shape[1] < width:
        features = features.tocsr()
        return csr_matrix(
            (features.data, features.indices, features.indptr),
            shape=(features.shape[0], width)
        )
    return features


def gram_from_features(spec: KernelSpec, features: csr_matrix) -> GramMatrix:
    n = features.shape[0]
    cap = load_settings().gram_cap
    if n > cap:
        logger.error("Refusing %d x %d Gram matrix (cap %d)", n, n, cap)
        raise GramSizeError(
            f"Gram matrix over {n} instances exceeds the configured cap of {cap}; "
            "raise MSMTREE_GRAM_CAP or subsample"
        )
    if spec.kind == KernelKind.linear:
        values = np.asarray(linear_kernel(features), dtype=np.float64)
    else:
        # rbf_kernel zeroes the self-distance diagonal, so k(x, x) = 1 exactly
        values = np.asarray(rbf_kernel(features, gamma=spec.eta), dtype=np.float64)
    # (a + b) / 2 is commutative in floating point, so this is exactly symmetric
    values = (values + values.T) / 2.0
    return GramMatrix(values=values, spec=spec)


def gram(spec: KernelSpec, dataset: SparseDataset, row_subset) -> GramMatrix:
    '''Exact pairwise kernel over the instances in `row_subset`.'''
    rows = np.asarray(row_subset, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("row subset is empty")
    return gram_from_features(spec, dataset.features[rows])


def explicit_features(g: GramMatrix) -> ExplicitFeatures:
    '''
    Factor K = X X' through the symmetric eigendecomposition, keeping eigenvalues
    above RANK_TOL times the largest one.
    '''
    eigenvalues, eigenvectors = eigh(g.values)
    trace = float(np.trace(g.values))
    smallest = float(eigenvalues[0])
    if smallest < -NOT_PSD_TOL * max(trace, 0.0):
        logger.error("Gram matrix has eigenvalue %.3e (trace %.3e)", smallest, trace)
        raise KernelNotPsdError(f"kernel not PSD: eigenvalue {smallest:.3e}")

    largest = float(eigenvalues[-1])
    if largest <= 0.0:
        # zero matrix: a single zero column reproduces it
        return ExplicitFeatures(rows=np.zeros((g.size, 1)))

    keep = eigenvalues > RANK_TOL * largest
    # eigh returns ascending order; put the dominant directions first
    kept_values = eigenvalues[keep][::-1]
    kept_vectors = eigenvectors[:, keep][:, ::-1]
    rows = kept_vectors * np.sqrt(kept_values)
    logger.debug("Explicit features: n=%d rank=%d", g.size, rows.shape[1])
    return ExplicitFeatures(rows=rows)

from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import List

import numpy as np
from scipy.sparse import csr_matrix

from src.modals.app_data import load_settings


class KernelView(ABC):
    '''
    Read access to Q = (effective kernel) + I/C for the dual
    max -1/2 a'Qa + 1'a over a >= 0.
    '''

    def __init__(self, n: int, C: float, cache_bytes: float | None = None):
        if C <= 0:
            raise ValueError("C must be positive")
        self.n = n
        self.C = C
        if cache_bytes is None:
            cache_bytes = load_settings().kernel_cache_mb * 1024 * 1024
        self._max_rows = max(1, int(cache_bytes // max(8 * n, 1)))
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()

    @abstractmethod
    def _compute_row(self, i: int) -> np.ndarray:
        # Row i of the effective kernel, without the ridge.
        pass

    @abstractmethod
    def kernel_diag(self) -> np.ndarray:
        pass

    @abstractmethod
    def kernel_matvec(self, v: np.ndarray) -> np.ndarray:
        pass

    def diag(self) -> np.ndarray:
        return self.kernel_diag() + 1.0 / self.C

    def row(self, i: int) -> np.ndarray:
        '''Row i of Q. LRU cached under the configured byte budget.'''
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        row = self._compute_row(i).copy()
        row[i] += 1.0 / self.C
        self._rows[i] = row
        if len(self._rows) > self._max_rows:
            self._rows.popitem(last=False)
        return row

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.kernel_matvec(v) + v / self.C

    def dual_objective(self, alpha: np.ndarray) -> float:
        return float(-0.5 * alpha @ self.matvec(alpha) + alpha.sum())


class SignedGramView(KernelView):
    '''Q = K ⊙ zz' + I/C for one labeling z.'''

    def __init__(self, gram: np.ndarray, z: np.ndarray, C: float, cache_bytes: float | None = None):
        super().__init__(gram.shape[0], C, cache_bytes)
        self.gram = gram
        self.z = np.asarray(z, dtype=np.float64)

    def _compute_row(self, i: int) -> np.ndarray:
        return self.gram[i] * (self.z[i] * self.z)

    def kernel_diag(self) -> np.ndarray:
        return np.diag(self.gram).copy()

    def kernel_matvec(self, v: np.ndarray) -> np.ndarray:
        return self.z * (self.gram @ (self.z * v))


class CombinedKernelView(KernelView):
    '''Q = sum_k mu_k K ⊙ z^k z^k' + I/C over instance-level labelings z^k.'''

    def __init__(
        self,
        gram: np.ndarray,
        labelings: List[np.ndarray],
        mu: np.ndarray,
        C: float,
        cache_bytes: float | None = None
    ):
        super().__init__(gram.shape[0], C, cache_bytes)
        self.gram = gram
        self.labelings = np.asarray(labelings, dtype=np.float64).reshape(len(labelings), -1)
        self.mu = np.asarray(mu, dtype=np.float64)
        if self.labelings.shape[0] != self.mu.shape[0]:
            raise ValueError("one weight per labeling required")
        # M_ij = sum_k mu_k z_i^k z_j^k modulates the base kernel
        self._weighted = self.labelings.T * self.mu

    def _compute_row(self, i: int) -> np.ndarray:
        modulation = self._weighted[i] @ self.labelings
        return self.gram[i] * modulation

    def kernel_diag(self) -> np.ndarray:
        # z squares to 1, so the modulation diagonal is sum(mu)
        return np.diag(self.gram) * self.mu.sum()

    def kernel_matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        for weight, z in zip(self.mu, self.labelings):
            if weight != 0.0:
                out += weight * z * (self.gram @ (z * v))
        return out

    def base_quadratic(self, alpha: np.ndarray) -> np.ndarray:
        '''alpha'(K ⊙ z^k z^k')alpha for every labeling k.'''
        signed = self.labelings * alpha
        return np.sum((signed @ self.gram) * signed, axis=1)


class LinearView:
    '''
    Linear kernel kept implicit: w = sum_j alpha_j z_j x_j is materialized so a
    coordinate update touches only the nonzeros of x_j.
    '''

    def __init__(self, features: csr_matrix, z: np.ndarray, C: float):
        if C <= 0:
            raise ValueError("C must be positive")
        self.features = features.tocsr().copy()
        self.features.sum_duplicates()
        self.z = np.asarray(z, dtype=np.float64)
        self.C = C
        self.n = self.features.shape[0]
        self.squared_norms = np.asarray(self.features.multiply(self.features).sum(axis=1)).ravel()

    def diag(self) -> np.ndarray:
        return self.squared_norms + 1.0 / self.C

    def weights(self, alpha: np.ndarray) -> np.ndarray:
        return np.asarray(self.features.T @ (alpha * self.z)).ravel()

    def dual_objective(self, alpha: np.ndarray) -> float:
        w = self.weights(alpha)
        return float(-0.5 * w @ w - 0.5 * alpha @ alpha / self.C + alpha.sum())

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.sparse import csr_matrix


DEFAULT_SOLVER_TOL = 1e-6
MAX_ITER_PER_INSTANCE = 10  # default sweep cap is 10·n


class KernelKind(str, Enum):
    linear = 'linear'
    gaussian = 'gaussian'


class KernelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: KernelKind = KernelKind.linear
    eta: float = 0.0  # Gaussian width, unused for linear

    @model_validator(mode='after')
    def check_eta(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.kind == KernelKind.gaussian and self.eta <= 0:
            raise ValueError("gaussian kernel needs eta > 0")
        return self


class SolverOptions(BaseModel):
    tol: float = DEFAULT_SOLVER_TOL
    max_iter: Optional[int] = None  # outer sweeps, None means 10·n
    seed: int = 0
    polish: bool = True  # exact solve on the support set between sweeps

    def sweep_cap(self, n: int) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return MAX_ITER_PER_INSTANCE * max(n, 1)


class DualSolution(BaseModel):
    '''Raw result of the coordinate-wise dual maximizer.'''
    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha: np.ndarray
    objective: float
    converged: bool
    sweeps: int
    kkt_violation: float
    history: List[float] = []  # dual objective after every sweep


class BinarySvmModel(BaseModel):
    '''
    Unbiased L2-loss SVM. Only support instances (alpha > 0) are kept, as copies,
    so the model is self-contained for prediction and serialization.
    '''
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    alpha: np.ndarray
    signed_labels: np.ndarray
    C: float
    kernel: KernelSpec
    support_vectors: csr_matrix
    support_refs: np.ndarray
    converged: bool = True
    weights: Optional[np.ndarray] = None  # materialized w for the linear kernel

    @property
    def support_size(self) -> int:
        return int(self.alpha.shape[0])

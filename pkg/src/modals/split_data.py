from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.modals.kernel_data import ExplicitFeatures, GramMatrix


DEFAULT_MAX_CUTS = 50
MSM0_CLASS_GUARD = 15


class SplitOptions(BaseModel):
    beta: Optional[float] = None  # None means ceil(|I| / 3), raised when infeasible
    tol_violation: float = 1e-3   # relative to |theta|
    max_cuts: int = DEFAULT_MAX_CUTS
    mkl_tol: float = 1e-5
    inner_tol: float = 1e-7
    max_mkl_iter: int = 100
    seed: int = 0


class CompressedLabel(BaseModel):
    '''One sign per class of the node, in the node's class order.'''
    model_config = ConfigDict(frozen=True)

    signs: Tuple[int, ...]

    @model_validator(mode='after')
    def check_signs(self):
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if len(set(self.signs)) < 2:
            raise ValueError("all-equal signs are the trivial labeling")
        return self

    def canonical(self) -> Tuple[int, ...]:
        '''Representative up to global sign flip: first sign is +1.'''
        if self.signs[0] == 1:
            return self.signs
        return tuple(-s for s in self.signs)

    def imbalance(self, class_sizes: np.ndarray) -> float:
        return float(abs(np.dot(class_sizes, self.signs)))

    def expand(self, instance_classes: np.ndarray) -> np.ndarray:
        '''Instance-level label vector; `instance_classes` holds node-local class positions.'''
        return np.asarray(self.signs, dtype=np.float64)[instance_classes]


class NodeProblem(BaseModel):
    '''One internal node: its classes, their instances, and the kernel over them.'''
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    classes: List[int]
    instance_index: np.ndarray      # rows of the owning dataset
    instance_classes: np.ndarray    # node-local class position 0..c*-1 per instance
    class_sizes: np.ndarray
    gram: GramMatrix
    features: Optional[ExplicitFeatures] = None  # Gaussian kernel
    raw_features: Optional[object] = None        # csr rows, linear kernel
    C: float
    beta: float

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def size(self) -> int:
        return int(self.instance_index.shape[0])

    def search_features(self):
        '''Rows spanning the feature space scanned by the violated-label search.'''
        if self.features is not None:
            return self.features.rows
        return self.raw_features


class CutRecord(BaseModel):
    iteration: int
    active: int
    objective: float
    violation: Optional[float] = None


class SplitState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    active_set: List[CompressedLabel] = []
    mu: np.ndarray = Field(default_factory=lambda: np.zeros(0))
    alpha: np.ndarray = Field(default_factory=lambda: np.zeros(0))
    theta: float = 0.0
    history: List[CutRecord] = []
    converged: bool = True


class LabelAffinityMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @classmethod
    def from_labels(cls, labels: List[CompressedLabel], mu: np.ndarray) -> 'LabelAffinityMatrix':
        signs = np.asarray([label.signs for label in labels], dtype=np.float64)
        values = (signs.T * mu) @ signs
        # sign products square to 1 and mu sums to 1
        np.fill_diagonal(values, 1.0)
        return cls(values=values)


class MklResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mu: np.ndarray
    alpha: np.ndarray
    objective: float
    converged: bool
    iterations: int
    objective_history: List[float] = []
    mu_history: List[np.ndarray] = []  # accepted weights, starting point first


class BruteForceResult(BaseModel):
    group_one: List[int]
    group_two: List[int]
    margin: float
    table: List[Tuple[List[int], List[int], float]]

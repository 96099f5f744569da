import numpy as np
from pydantic import BaseModel, ConfigDict

from src.modals.svm_data import KernelSpec


SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-8
NOT_PSD_TOL = 1e-6
RANK_TOL = 1e-10


class GramMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    spec: KernelSpec

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def is_symmetric(self) -> bool:
        return bool(np.max(np.abs(self.values - self.values.T), initial=0.0) <= SYMMETRY_TOL)

    def is_psd(self) -> bool:
        n = self.size
        smallest = float(np.linalg.eigvalsh(self.values)[0])
        return smallest >= -PSD_TOL * float(np.trace(self.values)) / n


class ExplicitFeatures(BaseModel):
    '''Rows whose inner products reproduce a Gram matrix.'''
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rows: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.rows.shape[1])

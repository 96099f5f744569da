import os
from enum import Enum
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, model_validator

from src.modals.split_data import SplitOptions
from src.modals.svm_data import KernelKind


# Range used for both C and eta when no grid is given.
DEFAULT_GRID = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
DEFAULT_FOLDS = 5
DEFAULT_REPEATS = 7
TIMING_FIELDS = {'wall_time_seconds', 'prediction_seconds_per_instance'}


class Settings(BaseModel):
    log_level: str = 'INFO'
    max_workers: int = 4
    gram_cap: int = 6000
    kernel_cache_mb: float = 256.0
    data_dir: Optional[str] = None


def load_settings() -> Settings:
    '''Environment first, `.env` fills whatever is unset.'''
    load_dotenv()
    return Settings(
        log_level=os.getenv('MSMTREE_LOG_LEVEL', 'INFO'),
        max_workers=int(os.getenv('MSMTREE_MAX_WORKERS', '4')),
        gram_cap=int(os.getenv('MSMTREE_GRAM_CAP', '6000')),
        kernel_cache_mb=float(os.getenv('MSMTREE_KERNEL_CACHE_MB', '256')),
        data_dir=os.getenv('MSMTREE_DATA_DIR') or None,
    )


class Method(str, Enum):
    msm = 'msm'
    oracle = 'oracle'
    random_tree = 'random-tree'
    one_vs_one = '1vs1'
    one_vs_rest = '1vsr'

    @property
    def is_tree(self) -> bool:
        return self in (Method.msm, Method.oracle, Method.random_tree)


class ExperimentConfig(BaseModel):
    train_path: str
    test_path: Optional[str] = None
    train_fraction: Optional[float] = None  # split train_path when no test file
    method: Method = Method.msm
    kernel: KernelKind = KernelKind.gaussian
    C_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_GRID))
    eta_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_GRID))
    C: Optional[float] = None    # fixed C skips tuning of C
    eta: Optional[float] = None  # fixed eta skips tuning of eta
    folds: int = DEFAULT_FOLDS
    seed: int = 0
    split: SplitOptions = Field(default_factory=SplitOptions)
    scale: bool = True
    trace: bool = False
    out_dir: str = 'out'

    @model_validator(mode='after')
    def check_config(self):
        if not self.C_grid or not self.eta_grid:
            raise ValueError("parameter grids must be nonempty")
        if any(v <= 0 for v in self.C_grid):
            raise ValueError("C grid values must be positive")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.train_fraction is not None and not 0 < self.train_fraction < 1:
            raise ValueError("train fraction must lie in (0, 1)")
        if self.C is not None and self.C <= 0:
            raise ValueError("C must be positive")
        if self.kernel == KernelKind.gaussian:
            etas = self.eta_grid if self.eta is None else [self.eta]
            if any(v <= 0 for v in etas):
                raise ValueError("gaussian kernel needs eta > 0")
        if self.kernel == KernelKind.linear and self.eta not in (None, 0.0):
            raise ValueError("eta has no meaning for the linear kernel")
        return self

    def candidate_grid(self) -> List[tuple]:
        '''(C, eta) pairs in tie-break order: smaller C first, then smaller eta.'''
        c_values = [self.C] if self.C is not None else sorted(set(self.C_grid))
        if self.kernel == KernelKind.linear:
            eta_values = [0.0]
        elif self.eta is not None:
            eta_values = [self.eta]
        else:
            eta_values = sorted(set(self.eta_grid))
        return [(c, eta) for c in c_values for eta in eta_values]


class EvalReport(BaseModel):
    method: str
    class_count: int
    labels: List[float]             # original label of each confusion row
    confusion: List[List[int]]      # row = true class, column = predicted
    per_class_accuracy: List[Optional[float]]
    mean_per_class_accuracy: float
    empty_classes: List[float] = []  # classes absent from the test set
    test_size: int
    evals_mean: float
    evals_max: int
    evals_min: int
    hyperparameters: Dict[str, float] = {}
    kernel: str = ''
    seed: int = 0
    scaled: bool = True
    non_converged: int = 0
    wall_time_seconds: float = 0.0
    prediction_seconds_per_instance: float = 0.0

    def deterministic_dump(self) -> dict:
        return self.model_dump(exclude=TIMING_FIELDS)

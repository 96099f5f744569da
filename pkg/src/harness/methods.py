from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.sparse import csr_matrix

from src.baselines.one_vs_one import (
    one_vs_one_from_dict,
    one_vs_one_to_dict,
    predict_1vs1_batch,
    train_1vs1,
)
from src.baselines.one_vs_rest import (
    one_vs_rest_from_dict,
    one_vs_rest_to_dict,
    predict_1vsR_batch,
    train_1vsR,
)
from src.errors import ModelFormatError, UnknownMethodError
from src.modals.app_data import Method
from src.modals.dataset_data import ScalingRecord, SparseDataset, with_width
from src.modals.multiclass_data import OneVsOneModel, OneVsRestModel
from src.modals.split_data import SplitOptions
from src.modals.svm_data import KernelKind, KernelSpec, SolverOptions
from src.modals.tree_data import ClassTree
from src.tree.class_tree import build_tree, predict_batch, tree_from_dict, tree_to_dict
from src.tree.splitters import MsmSplitter, OracleSplitter, RandomSplitter, Splitter


class TrainedModel(BaseModel):
    '''A fitted multiclass predictor of any method, plus what is needed to reuse it on raw data.'''
    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: Method
    kernel: KernelSpec
    C: float
    model: Union[ClassTree, OneVsOneModel, OneVsRestModel]
    label_map: List[float]
    feature_dim: int
    scaling: Optional[ScalingRecord] = None

    @property
    def class_count(self) -> int:
        return len(self.label_map)

    def non_converged(self) -> int:
        if isinstance(self.model, ClassTree):
            return self.model.non_converged()
        return sum(1 for svm in self.model.classifiers.values() if not svm.converged)

    def predict_batch(self, features: csr_matrix) -> Tuple[np.ndarray, np.ndarray]:
        '''(internal class 1..c, classifier evaluations) per row of already scaled features.'''
        features = with_width(features, self.feature_dim)
        if isinstance(self.model, ClassTree):
            return predict_batch(self.model, features)
        if isinstance(self.model, OneVsOneModel):
            return predict_1vs1_batch(self.model, features)
        return predict_1vsR_batch(self.model, features)

    def prepare(self, features: csr_matrix) -> csr_matrix:
        '''Map raw features through the stored training scaling.'''
        features = with_width(features, self.feature_dim)
        if self.scaling is None:
            return features
        return self.scaling.apply(features)


def make_splitter(method: Method, split_options: SplitOptions, seed: int) -> Splitter:
    if method == Method.msm:
        return MsmSplitter(split_options)
    if method == Method.oracle:
        return OracleSplitter(split_options)
    if method == Method.random_tree:
        return RandomSplitter(seed)
    raise UnknownMethodError(f"method '{method.value}' does not build a tree")


def kernel_spec(kind: KernelKind, eta: float) -> KernelSpec:
    if kind == KernelKind.linear:
        return KernelSpec(kind=kind)
    return KernelSpec(kind=kind, eta=eta)


def train_method(
    method: Method,
    train: SparseDataset,
    kernel: KernelSpec,
    C: float,
    split_options: SplitOptions | None = None,
    seed: int = 0,
    solver_options: SolverOptions | None = None,
    scaling: ScalingRecord | None = None,
    max_workers: int | None = None
) -> TrainedModel:
    split_options = split_options or SplitOptions(seed=seed)
    solver_options = solver_options or SolverOptions(seed=seed)
    if method.is_tree:
        model = build_tree(train, kernel, C, make_splitter(method, split_options, seed), solver_options)
    elif method == Method.one_vs_one:
        model = train_1vs1(train, kernel, C, solver_options, max_workers)
    elif method == Method.one_vs_rest:
        model = train_1vsR(train, kernel, C, solver_options, max_workers)
    else:
        raise UnknownMethodError(f"unknown method '{method}'")
    return TrainedModel(
        method=method,
        kernel=kernel,
        C=C,
        model=model,
        label_map=list(train.label_map),
        feature_dim=train.feature_dim,
        scaling=scaling
    )


def trained_to_dict(trained: TrainedModel) -> Tuple[dict, Optional[dict]]:
    '''model.json content, and tree.json content for tree methods.'''
    header = {
        'method': trained.method.value,
        'kernel': {'kind': trained.kernel.kind.value, 'eta': trained.kernel.eta},
        'C': trained.C,
        'label_map': trained.label_map,
        'feature_dim': trained.feature_dim,
        'scaling': trained.scaling.model_dump() if trained.scaling is not None else None,
    }
    if isinstance(trained.model, ClassTree):
        structure, models = tree_to_dict(trained.model)
        header['classifiers'] = models
        return header, structure
    if isinstance(trained.model, OneVsOneModel):
        header.update(one_vs_one_to_dict(trained.model))
    else:
        header.update(one_vs_rest_to_dict(trained.model))
    return header, None


def trained_from_dict(header: dict, structure: Optional[dict] = None) -> TrainedModel:
    try:
        method = Method(header['method'])
        kernel = KernelSpec(kind=header['kernel']['kind'], eta=header['kernel']['eta'])
        scaling = ScalingRecord(**header['scaling']) if header.get('scaling') else None
        if method.is_tree:
            if structure is None:
                raise ModelFormatError("tree methods need tree.json next to model.json")
            model = tree_from_dict(structure, header['classifiers'])
        elif method == Method.one_vs_one:
            model = one_vs_one_from_dict(header)
        else:
            model = one_vs_rest_from_dict(header)
        return TrainedModel(
            method=method,
            kernel=kernel,
            C=float(header['C']),
            model=model,
            label_map=[float(v) for v in header['label_map']],
            feature_dim=int(header['feature_dim']),
            scaling=scaling
        )
    except (KeyError, TypeError, ValueError) as error:
        raise ModelFormatError(f"malformed model file: {error}") from error

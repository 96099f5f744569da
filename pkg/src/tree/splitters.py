from abc import ABC, abstractmethod
import math
from typing import List, Tuple

import numpy as np

from src.modals.dataset_data import SparseDataset
from src.modals.split_data import SplitOptions
from src.modals.svm_data import KernelSpec, SolverOptions
from src.msm.brute_force import msm0_brute_force
from src.msm.node_split import build_node_problem, split_node


class Splitter(ABC):
    '''Chooses how one node's classes divide between its two children.'''

    name: str = ''

    @abstractmethod
    def split(
        self,
        dataset: SparseDataset,
        classes: List[int],
        kernel: KernelSpec,
        C: float,
        node_path: str = ''
    ) -> Tuple[List[int], List[int], bool]:
        # Returns (group with the smallest class, other group, search converged)
        pass


class MsmSplitter(Splitter):
    name = 'msm'

    def __init__(self, options: SplitOptions | None = None):
        self.options = options or SplitOptions()

    def split(self, dataset, classes, kernel, C, node_path=''):
        problem = build_node_problem(dataset, classes, kernel, C, self.options.beta)
        group_one, group_two, state = split_node(problem, self.options, node_path)
        return group_one, group_two, state.converged


class OracleSplitter(Splitter):
    '''Exhaustive maximum-margin split; only practical for small class counts.'''
    name = 'oracle'

    def __init__(self, options: SplitOptions | None = None):
        self.options = options or SplitOptions()

    def split(self, dataset, classes, kernel, C, node_path=''):
        problem = build_node_problem(dataset, classes, kernel, C, self.options.beta)
        result = msm0_brute_force(problem, SolverOptions(tol=self.options.inner_tol, seed=self.options.seed))
        return result.group_one, result.group_two, True


class RandomSplitter(Splitter):
    '''
    Uniformly random bipartition with sizes ceil(c/2) and floor(c/2). One generator
    serves the whole build, so a seed fixes the entire tree.
    '''
    name = 'random-tree'

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def split(self, dataset, classes, kernel, C, node_path=''):
        shuffled = [int(k) for k in self.rng.permutation(sorted(classes))]
        half = math.ceil(len(shuffled) / 2)
        group_a, group_b = sorted(shuffled[:half]), sorted(shuffled[half:])
        if group_b[0] < group_a[0]:
            group_a, group_b = group_b, group_a
        return group_a, group_b, True

from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.modals.split_data import LabelAffinityMatrix
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

TIE_DECIMALS = 12  # weights equal to this many decimals count as ties

Edge = Tuple[float, int, int]


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def root(self, node: int) -> int:
        while self.parent[node] != node:
            self.parent[node] = self.parent[self.parent[node]]
            node = self.parent[node]
        return self.parent[node]

    def join(self, a: int, b: int) -> bool:
        root_a, root_b = self.root(a), self.root(b)
        if root_a == root_b:
            return False
        self.parent[max(root_a, root_b)] = min(root_a, root_b)
        return True


def maximum_spanning_tree(weights: np.ndarray) -> List[Edge]:
    '''Kruskal on the complete graph; heavier edges first, ties in lexicographic (i, j) order.'''
    size = weights.shape[0]
    edges = [
        (round(float(weights[i, j]), TIE_DECIMALS), i, j)
        for i in range(size) for j in range(i + 1, size)
    ]
    edges.sort(key=lambda edge: (-edge[0], edge[1], edge[2]))

    forest = UnionFind(size)
    tree: List[Edge] = []
    for weight, i, j in edges:
        if forest.join(i, j):
            tree.append((weight, i, j))
            if len(tree) == size - 1:
                break
    return tree


def _components(size: int, edges: List[Edge]) -> List[int]:
    forest = UnionFind(size)
    for _, i, j in edges:
        forest.join(i, j)
    return [forest.root(node) for node in range(size)]


def _cut_order(tree: List[Edge]) -> List[Edge]:
    # lightest first; among equal weights the lexicographically last edge first
    return sorted(tree, key=lambda edge: (edge[0], -edge[1], -edge[2]))


def _groups(classes: Sequence[int], tree: List[Edge], cut: Edge) -> Tuple[List[int], List[int]]:
    size = len(classes)
    roots = _components(size, [edge for edge in tree if edge is not cut])
    first_class = int(np.argmin(classes))
    group_one = sorted(int(classes[k]) for k in range(size) if roots[k] == roots[first_class])
    group_two = sorted(int(classes[k]) for k in range(size) if roots[k] != roots[first_class])
    return group_one, group_two


def extract_partition(
    affinity: LabelAffinityMatrix,
    classes: Sequence[int],
    class_sizes: Optional[np.ndarray] = None,
    beta: Optional[float] = None
) -> Tuple[List[int], List[int]]:
    '''
    Cut the maximum spanning tree of the label affinity graph at its lightest edge.
    Among equally light edges the lexicographically last one goes. The side holding
    the smallest class index is returned first.

    With `class_sizes` and `beta` the lightest cut whose two sides differ by at most
    `beta` instances is taken instead; the plain lightest cut remains when none does.
    '''
    size = len(classes)
    if size < 2:
        raise ValueError("need at least two classes to partition")

    tree = maximum_spanning_tree(affinity.values)
    candidates = _cut_order(tree)
    if class_sizes is None or beta is None:
        return _groups(classes, tree, candidates[0])

    sizes = {int(k): float(n) for k, n in zip(classes, class_sizes)}
    for cut in candidates:
        group_one, group_two = _groups(classes, tree, cut)
        imbalance = abs(sum(sizes[k] for k in group_one) - sum(sizes[k] for k in group_two))
        if imbalance <= beta:
            return group_one, group_two

    logger.info("No spanning-tree cut meets the balance bound %.6g, keeping the lightest", beta)
    return _groups(classes, tree, candidates[0])

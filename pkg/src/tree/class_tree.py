from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from src.errors import ModelFormatError, MsmTreeError, TreeBuildError
from src.modals.dataset_data import SparseDataset, SparseVector
from src.modals.svm_data import BinarySvmModel, KernelSpec, SolverOptions
from src.modals.tree_data import ClassTree, TreeNode
from src.solver.svm_model import decision_values, model_from_dict, model_to_dict, train_binary_svm
from src.tree.splitters import Splitter
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def train_node_classifier(
    dataset: SparseDataset,
    group_one: List[int],
    group_two: List[int],
    kernel: KernelSpec,
    C: float,
    options: SolverOptions | None = None
) -> BinarySvmModel:
    '''SVM routing group_one (+1) against group_two (-1), trained on their instances only.'''
    rows = np.flatnonzero(np.isin(dataset.labels, group_one + group_two))
    z = np.where(np.isin(dataset.labels[rows], group_one), 1.0, -1.0)
    if z.min() > 0 or z.max() < 0:
        raise MsmTreeError("both child groups need training instances")
    return train_binary_svm(dataset.features[rows], z, kernel, C, refs=rows, options=options)


def build_tree(
    train: SparseDataset,
    kernel: KernelSpec,
    C: float,
    splitter: Splitter,
    solver_options: SolverOptions | None = None
) -> ClassTree:
    '''
    Grow the tree top-down, depth first, left child before right. Every internal node
    is split by `splitter` and gets a routing classifier for its two groups.
    '''
    missing = [k for k, n in enumerate(train.class_counts(), start=1) if n == 0]
    if missing:
        raise TreeBuildError(f"classes without training instances: {missing}")

    tree = ClassTree(class_count=train.class_count, splitter=splitter.name)
    tree.nodes.append(TreeNode(classes=list(range(1, train.class_count + 1)), path=''))
    pending = [0]
    while pending:
        ref = pending.pop()
        node = tree.nodes[ref]
        if len(node.classes) < 2:
            continue
        try:
            group_one, group_two, converged = splitter.split(train, node.classes, kernel, C, node.path)
            classifier = train_node_classifier(train, group_one, group_two, kernel, C, solver_options)
        except TreeBuildError:
            raise
        except MsmTreeError as error:
            raise TreeBuildError(str(error), node.path) from error

        node.classifier = classifier
        node.split_converged = converged
        if not classifier.converged:
            logger.warning("Routing SVM at node %s stopped before convergence", node.path or 'root')
        if not converged:
            logger.warning("Split search at node %s stopped before convergence", node.path or 'root')
        node.left = len(tree.nodes)
        tree.nodes.append(TreeNode(classes=group_one, path=node.path + 'L'))
        node.right = len(tree.nodes)
        tree.nodes.append(TreeNode(classes=group_two, path=node.path + 'R'))
        logger.debug("Node %s: %s | %s", node.path or 'root', group_one, group_two)
        # right pushed first so the left subtree is built first
        pending.extend([node.right, node.left])

    validate_tree(tree)
    logger.info("Built %s tree over %d classes, depth %d", splitter.name, tree.class_count, tree.depth)
    return tree


def validate_tree(tree: ClassTree):
    '''Raise TreeBuildError unless the tree is a full binary partition of 1..c.'''
    size = len(tree.nodes)
    if not 0 <= tree.root < size:
        raise TreeBuildError(f"root index {tree.root} outside 0..{size - 1}")
    root = tree.nodes[tree.root]
    if root.classes != list(range(1, tree.class_count + 1)):
        raise TreeBuildError("root must hold every class")
    for node in tree.nodes:
        if node.is_leaf:
            if len(node.classes) != 1:
                raise TreeBuildError("leaves must hold exactly one class", node.path)
            continue
        if node.left is None or node.right is None:
            raise TreeBuildError("internal nodes need two children", node.path)
        if node.classifier is None:
            raise TreeBuildError("internal node has no classifier", node.path)
        if not (0 <= node.left < size and 0 <= node.right < size):
            raise TreeBuildError(f"child index outside 0..{size - 1}", node.path)
        left, right = tree.nodes[node.left].classes, tree.nodes[node.right].classes
        if not left or not right or set(left) & set(right) or sorted(left + right) != sorted(node.classes):
            raise TreeBuildError("children do not partition the node's classes", node.path)

    leaves = sorted(node.classes[0] for node in tree.leaves())
    if leaves != list(range(1, tree.class_count + 1)):
        raise TreeBuildError("leaf classes must be exactly 1..c")
    if len(tree.internal_nodes()) != tree.class_count - 1:
        raise TreeBuildError("tree must have c - 1 internal nodes")


def predict(tree: ClassTree, x: SparseVector | csr_matrix) -> Tuple[int, int]:
    '''Route x from the root to a leaf; returns (class, classifier evaluations).'''
    row = x.to_csr() if isinstance(x, SparseVector) else x
    classes, evals = predict_batch(tree, row)
    return int(classes[0]), int(evals[0])


def predict_batch(tree: ClassTree, features: csr_matrix) -> Tuple[np.ndarray, np.ndarray]:
    '''
    Route every row at once: each internal node scores only the rows that reached it.
    Decision value 0 goes left.
    '''
    n = features.shape[0]
    classes = np.zeros(n, dtype=np.int64)
    evals = np.zeros(n, dtype=np.int64)
    pending = [(tree.root, np.arange(n))]
    while pending:
        ref, rows = pending.pop()
        node = tree.nodes[ref]
        if node.is_leaf:
            classes[rows] = node.classes[0]
            continue
        if rows.size == 0:
            continue
        scores = decision_values(node.classifier, features[rows])
        evals[rows] += 1
        pending.append((node.left, rows[scores >= 0]))
        pending.append((node.right, rows[scores < 0]))
    return classes, evals


def tree_to_dict(tree: ClassTree) -> Tuple[dict, List[dict]]:
    '''Tree structure and its classifiers; nodes point into the classifier list by `model_ref`.'''
    models: List[dict] = []
    nodes = []
    for node in tree.nodes:
        model_ref = None
        if node.classifier is not None:
            model_ref = len(models)
            models.append(model_to_dict(node.classifier))
        nodes.append({
            'classes': node.classes,
            'left': node.left,
            'right': node.right,
            'model_ref': model_ref,
            'path': node.path,
            'split_converged': node.split_converged,
        })
    structure = {
        'root': tree.root,
        'class_count': tree.class_count,
        'splitter': tree.splitter,
        'nodes': nodes,
    }
    return structure, models


def tree_from_dict(structure: dict, models: List[dict]) -> ClassTree:
    try:
        classifiers: Dict[int, BinarySvmModel] = {}
        nodes = []
        for obj in structure['nodes']:
            ref: Optional[int] = obj.get('model_ref')
            classifier = None
            if ref is not None:
                if ref not in classifiers:
                    classifiers[ref] = model_from_dict(models[ref])
                classifier = classifiers[ref]
            nodes.append(TreeNode(
                classes=[int(k) for k in obj['classes']],
                left=obj['left'],
                right=obj['right'],
                classifier=classifier,
                path=obj.get('path', ''),
                split_converged=obj.get('split_converged', True)
            ))
        tree = ClassTree(
            nodes=nodes,
            root=int(structure['root']),
            class_count=int(structure['class_count']),
            splitter=structure.get('splitter', '')
        )
    except (KeyError, IndexError, TypeError, ValueError) as error:
        raise ModelFormatError(f"malformed tree: {error}") from error
    try:
        validate_tree(tree)
    except TreeBuildError as error:
        raise ModelFormatError(f"malformed tree: {error}") from error
    return tree


def show_tree(tree: ClassTree, label_map: Optional[List[float]] = None) -> str:
    '''Indented text dump of the nested class grouping, one node per line.'''

    def name(k: int) -> str:
        if label_map is None:
            return str(k)
        return f"{label_map[k - 1]:g}"

    lines = []
    stack = [(tree.root, 0)]
    while stack:
        ref, level = stack.pop()
        node = tree.nodes[ref]
        members = ' '.join(name(k) for k in node.classes)
        lines.append(f"{'  ' * level}{'[' + members + ']' if not node.is_leaf else members}")
        if not node.is_leaf:
            stack.extend([(node.right, level + 1), (node.left, level + 1)])
    return '\n'.join(lines)

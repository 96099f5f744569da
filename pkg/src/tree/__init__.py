from src.tree.class_tree import (
    build_tree,
    predict,
    predict_batch,
    show_tree,
    train_node_classifier,
    tree_from_dict,
    tree_to_dict,
)
from src.tree.splitters import MsmSplitter, OracleSplitter, RandomSplitter, Splitter

__all__ = [
    'MsmSplitter',
    'OracleSplitter',
    'RandomSplitter',
    'Splitter',
    'build_tree',
    'predict',
    'predict_batch',
    'show_tree',
    'train_node_classifier',
    'tree_from_dict',
    'tree_to_dict',
]

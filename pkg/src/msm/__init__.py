from src.msm.brute_force import msm0_brute_force
from src.msm.graph_cut import extract_partition
from src.msm.node_split import build_node_problem, split_node
from src.msm.simple_mkl import simple_mkl
from src.msm.violated_label import most_violated_label

__all__ = [
    'build_node_problem',
    'extract_partition',
    'most_violated_label',
    'msm0_brute_force',
    'simple_mkl',
    'split_node',
]

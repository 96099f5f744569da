from src.kernels.gram import (
    cross_kernel,
    eval_kernel,
    explicit_features,
    gram,
    gram_from_features,
)

__all__ = [
    'cross_kernel',
    'eval_kernel',
    'explicit_features',
    'gram',
    'gram_from_features',
]

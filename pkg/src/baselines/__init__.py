from src.baselines.one_vs_one import (
    one_vs_one_from_dict,
    one_vs_one_to_dict,
    one_vs_one_vote,
    predict_1vs1,
    predict_1vs1_batch,
    train_1vs1,
)
from src.baselines.one_vs_rest import (
    one_vs_rest_from_dict,
    one_vs_rest_to_dict,
    predict_1vsR,
    predict_1vsR_batch,
    train_1vsR,
)

__all__ = [
    'one_vs_one_from_dict',
    'one_vs_one_to_dict',
    'one_vs_one_vote',
    'one_vs_rest_from_dict',
    'one_vs_rest_to_dict',
    'predict_1vs1',
    'predict_1vs1_batch',
    'predict_1vsR',
    'predict_1vsR_batch',
    'train_1vs1',
    'train_1vsR',
]

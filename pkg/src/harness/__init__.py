from src.harness.cross_validation import cross_validate
from src.harness.evaluation import evaluate, mean_per_class_accuracy
from src.harness.methods import TrainedModel, train_method
from src.harness.model_store import load_trained, save_trained

__all__ = [
    'TrainedModel',
    'cross_validate',
    'evaluate',
    'load_trained',
    'mean_per_class_accuracy',
    'save_trained',
    'train_method',
]

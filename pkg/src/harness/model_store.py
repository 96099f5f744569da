import json
import os
from typing import List

from src.errors import ModelFormatError
from src.harness.methods import TrainedModel, trained_from_dict, trained_to_dict
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

MODEL_FILE = 'model.json'
TREE_FILE = 'tree.json'


def write_json(obj, file_path: str):
    with open(file_path, 'w', encoding='utf-8') as fp:
        json.dump(obj, fp, indent=2, sort_keys=True)
        fp.write('\n')


def save_trained(trained: TrainedModel, out_dir: str) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    header, structure = trained_to_dict(trained)
    written = [os.path.join(out_dir, MODEL_FILE)]
    write_json(header, written[0])
    tree_path = os.path.join(out_dir, TREE_FILE)
    if structure is not None:
        written.append(tree_path)
        write_json(structure, tree_path)
    elif os.path.exists(tree_path):
        # a stale tree from an earlier run would not match this model
        os.remove(tree_path)
    logger.info("Saved %s model to '%s'", trained.method.value, out_dir)
    return written


def load_trained(model_dir: str) -> TrainedModel:
    model_path = os.path.join(model_dir, MODEL_FILE)
    tree_path = os.path.join(model_dir, TREE_FILE)
    try:
        with open(model_path, 'r', encoding='utf-8') as fp:
            header = json.load(fp)
        structure = None
        if os.path.exists(tree_path):
            with open(tree_path, 'r', encoding='utf-8') as fp:
                structure = json.load(fp)
    except FileNotFoundError as error:
        raise ModelFormatError(f"no model in '{model_dir}': {error}") from error
    except json.JSONDecodeError as error:
        raise ModelFormatError(f"model file is not valid JSON: {error}") from error
    return trained_from_dict(header, structure)

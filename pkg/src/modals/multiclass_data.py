from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from src.modals.svm_data import BinarySvmModel


class OneVsOneModel(BaseModel):
    '''classifiers[(i, j)], i < j, separates class i (+1) from class j (-1).'''
    model_config = ConfigDict(arbitrary_types_allowed=True)

    class_count: int
    classifiers: Dict[Tuple[int, int], BinarySvmModel]

    @model_validator(mode='after')
    def check_pairs(self):
        c = self.class_count
        if len(self.classifiers) != c * (c - 1) // 2:
            raise ValueError(f"1vs1 needs {c * (c - 1) // 2} classifiers, got {len(self.classifiers)}")
        return self


class OneVsRestModel(BaseModel):
    '''classifiers[i] separates class i (+1) from every other class (-1).'''
    model_config = ConfigDict(arbitrary_types_allowed=True)

    class_count: int
    classifiers: Dict[int, BinarySvmModel]

    @model_validator(mode='after')
    def check_classes(self):
        if sorted(self.classifiers) != list(range(1, self.class_count + 1)):
            raise ValueError(f"1vsR needs one classifier per class 1..{self.class_count}")
        return self

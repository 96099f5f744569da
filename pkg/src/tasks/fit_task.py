from abc import ABC, abstractmethod
from typing import Any, List

from pydantic import BaseModel


class FitResult(BaseModel):
    key: tuple
    tags: list = []
    value: Any = None


class FitTask(ABC):
    '''
    One independent fit. `key` orders results deterministically regardless of
    which worker finished first.
    '''

    @property
    @abstractmethod
    def key(self) -> tuple:
        pass

    @property
    def tags(self) -> List[str]:
        return []

    @abstractmethod
    def run(self) -> Any:
        # Performs the fit and returns the raw value stored on the FitResult
        pass

    def postprocess(self, value: Any) -> FitResult:
        return FitResult(key=self.key, tags=self.tags, value=value)


class CallableTask(FitTask):
    '''Wraps a plain function call as a FitTask.'''

    def __init__(self, key: tuple, func, *args, tags: List[str] | None = None, **kwargs):
        self._key = key
        self._tags = tags or []
        self.func = func
        self.args = args
        self.kwargs = kwargs

    @property
    def key(self) -> tuple:
        return self._key

    @property
    def tags(self) -> List[str]:
        return self._tags

    def run(self) -> Any:
        return self.func(*self.args, **self.kwargs)

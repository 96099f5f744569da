import threading
import time

import pytest

from src.tasks.fit_task import CallableTask, FitTask
from src.tasks.task_executor import FitTaskExecutor


class SleepyTask(FitTask):
    '''Later keys finish first so completion order differs from key order.'''

    def __init__(self, k: int):
        self.k = k

    @property
    def key(self) -> tuple:
        return (self.k,)

    @property
    def tags(self):
        return ['even'] if self.k % 2 == 0 else ['odd']

    def run(self):
        time.sleep(0.01 * (5 - self.k))
        return self.k * self.k


@pytest.mark.parametrize('workers', [1, 4])
def test_results_come_back_in_key_order(workers):
    executor = FitTaskExecutor(workers)
    for k in range(5):
        executor.add_task(SleepyTask(k))
    assert len(executor) == 5
    executor.run_tasks()
    assert len(executor) == 0
    assert [result.value for result in executor.fetch_results()] == [0, 1, 4, 9, 16]


def test_fetch_results_filters_on_tags():
    executor = FitTaskExecutor(2)
    for k in range(5):
        executor.add_task(SleepyTask(k))
    executor.run_tasks()
    assert [result.key for result in executor.fetch_results(['even'])] == [(0,), (2,), (4,)]
    assert executor.fetch_results(['even', 'odd']) == []


def test_progress_callback_reaches_one():
    seen = []
    executor = FitTaskExecutor(3)
    for k in range(4):
        executor.add_task(CallableTask((k,), pow, k, 2))
    executor.run_tasks(update_progress_cb=seen.append)
    assert sorted(seen) == [0.25, 0.5, 0.75, 1.0]


def test_callable_task_passes_arguments_and_tags():
    task = CallableTask(('a', 1), lambda x, y=0: x - y, 5, y=2, tags=['pair'])
    result = task.postprocess(task.run())
    assert (result.key, result.tags, result.value) == (('a', 1), ['pair'], 3)


def test_pool_uses_worker_threads():
    names = set()

    def record():
        names.add(threading.current_thread().name)
        time.sleep(0.02)

    executor = FitTaskExecutor(2)
    for k in range(4):
        executor.add_task(CallableTask((k,), record))
    executor.run_tasks()
    assert threading.main_thread().name not in names


def test_empty_executor_is_a_no_op():
    executor = FitTaskExecutor(2)
    executor.run_tasks()
    assert executor.fetch_results() == []


def test_worker_count_comes_from_the_environment(monkeypatch):
    monkeypatch.setenv('MSMTREE_MAX_WORKERS', '3')
    assert FitTaskExecutor().max_workers == 3

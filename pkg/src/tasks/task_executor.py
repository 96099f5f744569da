from typing import List
import concurrent.futures

from src.modals.app_data import load_settings
from src.tasks.fit_task import FitResult, FitTask
from src.utils.logger import get_module_logger


logger = get_module_logger(__name__)


class FitTaskExecutor:
    def __init__(self, max_workers: int | None = None):
        # Lists to track tasks
        self.tasks: List[FitTask] = []
        self.results: List[FitResult] = []
        self.max_workers = max_workers or load_settings().max_workers

    def __len__(self):
        # Return length of task stack
        return len(self.tasks)

    def add_task(self, task: FitTask):
        self.tasks.append(task)

    def clear(self):
        self.tasks = []
        self.results = []

    def execute(self, task: FitTask) -> FitResult:
        logger.debug("Running fit task %s", task.key)
        return task.postprocess(task.run())

    def run_tasks(self, update_progress_cb=None):
        '''
        Runs queued tasks on a thread pool of `max_workers`.
        Additionally you can pass a callback function 'update_progress_cb' to report progress.
        '''
        if len(self.tasks) == 0:
            logger.info("No tasks found to execute!")
            return

        if self.max_workers == 1:
            # inline keeps tracebacks simple and avoids pool overhead
            while len(self.tasks) != 0:
                self.results.append(self.execute(self.tasks.pop()))
            return

        futures = []  # Store promises for task

        with concurrent.futures.ThreadPoolExecutor(self.max_workers) as executor:
            total = len(self.tasks)
            while len(self.tasks) != 0:
                task = self.tasks.pop()
                future = executor.submit(
                    self.execute, task=task
                )
                futures.append(future)

            for future in concurrent.futures.as_completed(futures):
                self.results.append(future.result())

                if update_progress_cb is not None and callable(update_progress_cb):
                    update_progress_cb(len(self.results) / total)

    def fetch_results(self, search_tags: List[str] = []) -> List[FitResult]:
        '''Results sorted by task key, optionally restricted to those carrying every tag.'''
        ordered = sorted(self.results, key=lambda result: result.key)
        if len(search_tags) == 0:
            return ordered

        wanted = set(search_tags)
        return [result for result in ordered if wanted <= set(result.tags)]

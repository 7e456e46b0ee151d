import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


@dataclass
class WorkerPoolConfig:
    max_workers: int = 4
    min_items_for_threads: int = 2


class WorkerPool:
    """
    Пул потоков с упорядоченным результатом.

    Порядок выходного списка всегда совпадает с порядком входных задач,
    поэтому последующая редукция не зависит от расписания потоков.
    """

    def __init__(self, config: WorkerPoolConfig):
        self.config = config

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        tasks: Sequence[T] = list(items)
        start_time = time.perf_counter()
        if self.config.max_workers <= 1 or len(tasks) < self.config.min_items_for_threads:
            results = [func(item) for item in tasks]
        else:
            workers = min(self.config.max_workers, len(tasks))
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(func, tasks))
        execution_time = time.perf_counter() - start_time
        name = getattr(func, "__name__", type(func).__name__)
        logger.debug(f"Обработано {len(tasks)} задач ({name}) за {execution_time:.2f}с")
        return results


SERIAL_POOL_CONFIG = WorkerPoolConfig(max_workers=1)

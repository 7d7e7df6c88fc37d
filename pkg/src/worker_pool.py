#!/usr/bin/env python3
"""
Thread pool management for Monte Carlo sampling and parameter sweeps
Results are always returned in submission order so outputs do not depend
on the worker count.
"""

import logging
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional

from errors import ParameterError

logger = logging.getLogger(__name__)


class WorkerPool:
    """
    Manages a thread pool for parallel evaluation
    """
    def __init__(self, max_workers: int = 1):
        """
        Initialize the worker pool

        Args:
            max_workers: Maximum number of worker threads (1 runs everything inline)
        """
        if max_workers < 1:
            raise ParameterError(f"workers must be >= 1, got {max_workers}")
        self.max_workers = int(max_workers)
        self.pool: Optional[ThreadPoolExecutor] = None
        self.create_pool()

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown()

    def create_pool(self):
        """Create the thread pool; no executor is needed for a single worker"""
        if self.max_workers > 1:
            self.pool = ThreadPoolExecutor(max_workers=self.max_workers,
                                           thread_name_prefix='worker')
            logger.debug(f"Thread pool created with {self.max_workers} workers")

    def submit(self, func: Callable, *args, **kwargs) -> Future:
        """
        Submit a task to the thread pool

        Args:
            func: Function to execute
            *args: Arguments to pass to the function
            **kwargs: Keyword arguments to pass to the function

        Returns:
            Future object (already resolved when running inline)
        """
        if self.pool:
            return self.pool.submit(func, *args, **kwargs)

        future: Future = Future()
        try:
            future.set_result(func(*args, **kwargs))
        except Exception as e:
            future.set_exception(e)
        return future

    def map_ordered(self, func: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """
        Apply func to every item and collect results in input order

        Args:
            func: Single-argument function
            items: Work items

        Returns:
            List of results aligned with items; the first failure is re-raised
        """
        futures = [self.submit(func, item) for item in items]
        return [future.result() for future in futures]

    def shutdown(self, wait: bool = True):
        """
        Shutdown the thread pool

        Args:
            wait: Whether to wait for pending tasks to complete
        """
        if self.pool:
            self.pool.shutdown(wait=wait)
            self.pool = None

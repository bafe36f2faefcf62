"""Provides the worker pool used for mu grids and parameter sweeps."""
import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from .const import DEFAULT_JOBS
from .exceptions import InvalidInvocation, TaskException

log = logging.getLogger(__package__)


class WorkerPool(object):
    """WorkerPool runs independent tasks inline or on worker processes."""

    def __init__(self, jobs=DEFAULT_JOBS, executor=None):
        """Create an instance of the WorkerPool class.

        :param jobs: (Optional) Number of worker processes; ``1`` runs every task
            in the calling process. (Default: const.DEFAULT_JOBS)
        :param executor: (Optional) An executor compatible with
            ``concurrent.futures.Executor`` to use instead of a new process pool.

        """
        if jobs is None or jobs < 1:
            raise InvalidInvocation(f"jobs must be at least 1, not {jobs}")
        self.jobs = jobs
        self._executor = executor
        if self._executor is None and jobs > 1:
            self._executor = ProcessPoolExecutor(max_workers=jobs)

    def __enter__(self):
        """Allow this object to be used as a context manager."""
        return self

    def __exit__(self, *_args):
        """Allow this object to be used as a context manager."""
        self.close()

    async def __aenter__(self):
        """Allow this object to be used as an async context manager."""
        return self

    async def __aexit__(self, *_args):
        """Allow this object to be used as an async context manager."""
        self.close()

    def close(self):
        """Shut down the worker processes, if any."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, function, items):
        """Return ``[function(item) for item in items]`` in input order."""
        items = list(items)
        log.debug(f"Mapping {function.__name__} over {len(items)} items")
        if self._executor is None:
            return [function(item) for item in items]
        return list(self._executor.map(function, items))

    async def run(self, function, *args, **kwargs):
        """Run one task capturing any errors that may occur."""
        try:
            if self._executor is None:
                return function(*args, **kwargs)
            loop = asyncio.get_running_loop()
            return await loop.run_in_executor(
                self._executor, partial(function, *args, **kwargs)
            )
        except Exception as exc:
            raise TaskException(exc, args, kwargs)

    async def gather(self, function, items):
        """Return the results of ``function`` over ``items`` in input order.

        A failed item is represented by its :class:`.TaskException`.

        """

        async def attempt(item):
            try:
                return await self.run(function, item)
            except TaskException as exception:
                log.warning(f"Task on {item!r} failed: {exception}")
                return exception

        return list(await asyncio.gather(*(attempt(item) for item in items)))

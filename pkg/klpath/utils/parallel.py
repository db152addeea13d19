"""worker pool helpers with order-preserving results"""
import logging
from typing import Callable, Iterable, List, Sequence, TypeVar

from joblib import Parallel, delayed

from klpath.domain.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_ordered(func: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> List[R]:
    """
    map func over items on a thread pool, returning results in item order

    callers reduce the returned list sequentially, so the outcome never depends
    on the number of workers.
    """
    items = list(items)
    n_jobs = threads or settings.threads
    if n_jobs == 1 or len(items) <= 1:
        return [func(item) for item in items]

    logger.debug(f"dispatching {len(items)} tasks to {n_jobs} workers")
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(item) for item in items)


def chunked(values: Sequence[T], chunk_size: int) -> List[Sequence[T]]:
    """consecutive slices of values of length chunk_size"""
    return [values[start:start + chunk_size] for start in range(0, len(values), chunk_size)]

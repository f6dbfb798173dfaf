"""Order-preserving thread-pool map for independent grid evaluations."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from src.core.config import get_config

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply fn to every item, in parallel when HSFL_MAX_WORKERS allows it.

    numpy releases the GIL inside LAPACK calls, so threads overlap the
    eigensolves. Results come back in input order.
    """
    work = list(items)
    workers = get_config().max_workers
    if workers == 1 or len(work) < 2:
        return [fn(x) for x in work]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, work))

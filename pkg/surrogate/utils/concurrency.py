import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config import SURROGATE_THREADS

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        threads = SURROGATE_THREADS
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def run_parallel(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Maps `func` over `items` on a thread pool and returns results in input order.

    `threads=1` runs inline in the calling thread.
    """
    items = list(items)
    threads = min(resolve_threads(threads), max(len(items), 1))
    if threads == 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))

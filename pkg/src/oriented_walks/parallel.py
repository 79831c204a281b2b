"""Ordered replicate map over a thread pool."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def replicate_map(fn: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    """Evaluate ``fn(0), ..., fn(count - 1)`` and return results in index order.

    Each call must derive its own random stream from its index; the result is
    then independent of ``threads``.
    """
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))

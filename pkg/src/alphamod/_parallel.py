"""Order-preserving map over sweep points, optionally across processes."""

from __future__ import annotations

from typing import Callable, List, Sequence, TypeVar

A = TypeVar("A")
B = TypeVar("B")

__all__ = ["map_jobs"]


def map_jobs(fn: Callable[[A], B], items: Sequence[A], jobs: int = 1) -> List[B]:
    """Apply fn to each item, in order.

    jobs > 1 fans the items out to a process pool; results come back in input
    order either way, so a parallel sweep serializes identically to a serial
    one.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def map_trials(fn: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    """Run fn(0..count-1); results come back in index order whatever the thread count."""
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))

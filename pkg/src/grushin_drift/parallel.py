"""Thread-pool helper; the pool size comes from ``GRUSHIN_DRIFT_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

THREADS_ENV = "GRUSHIN_DRIFT_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Ordered map; runs serially unless more than one thread is configured."""
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

"""Ordered fan-out for independent sweep points."""

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "CATKIT_THREADS"


def worker_count() -> int:
    """Concurrency cap from CATKIT_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def ordered_map(fn, items) -> list:
    """map(fn, items) with results in input order whatever the completion order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

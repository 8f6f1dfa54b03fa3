"""Ordered thread-pool map used by the experiment drivers.

Results are always returned in input order, so output never depends on the
number of workers.
"""

import os
from concurrent.futures import ThreadPoolExecutor

_threads = None


def set_threads(n):
    """Set the worker count; ``None`` falls back to ``SHIFTSPAN_THREADS`` or 1."""
    global _threads
    if n is not None and int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _threads = None if n is None else int(n)


def get_threads():
    if _threads is not None:
        return _threads
    env = os.environ.get("SHIFTSPAN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def pmap(fn, items):
    items = list(items)
    n = get_threads()
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))

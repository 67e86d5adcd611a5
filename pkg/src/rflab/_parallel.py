"""Order-preserving parallel map used by the Monte-Carlo loops.

Results are always returned in input order and every reduction downstream
consumes them in that order, so the thread count never changes numerics.
"""

import os
from concurrent.futures import ThreadPoolExecutor

_threads = None


def default_threads():
    env = os.environ.get("RFLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def get_threads():
    return _threads if _threads is not None else default_threads()


def set_threads(n):
    """Set the worker count for subsequent calls (``None`` restores the default)."""
    global _threads
    if n is not None and int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _threads = None if n is None else int(n)


def ordered_map(fn, items):
    items = list(items)
    n = min(get_threads(), len(items))
    if n <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))

"""Thread-pool helper honouring the ``BCFKIT_THREADS`` environment variable."""

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers():
    """Worker cap: ``BCFKIT_THREADS`` if set to a positive integer, else 1."""
    raw = os.environ.get("BCFKIT_THREADS", "").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def ordered_map(func, items):
    """``[func(x) for x in items]``, run on up to ``max_workers()`` threads.

    Results come back in input order, so the outcome does not depend on the
    number of workers.
    """
    items = list(items)
    n = min(max_workers(), len(items))
    if n <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))

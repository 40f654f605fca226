"""Small shared helpers."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def pmap(fn, items):
    """Ordered map, parallel when SKELMEAS_THREADS asks for more than one.

    Sequential by default so exceptions surface with plain tracebacks.
    """
    items = list(items)
    try:
        workers = int(os.environ.get("SKELMEAS_THREADS", "1"))
    except ValueError:
        workers = 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

"""Order-independent parallel mapping.

Work items are addressed by index and results are placed by index, so the
output is identical for any thread count. Thread-based because the heavy
lifting happens inside BLAS/LAPACK calls that release the GIL.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    """Thread count from CROSSBLOCK_THREADS, defaulting to 1."""
    raw = os.environ.get("CROSSBLOCK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, n_items: int, threads: int = 1) -> list:
    """Evaluate fn(i) for i in range(n_items) and return results in index order."""
    if threads <= 1 or n_items <= 1:
        return [fn(i) for i in range(n_items)]
    results = [None] * n_items
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(fn, i): i for i in range(n_items)}
        for fut in futures:
            results[futures[fut]] = fut.result()
    return results

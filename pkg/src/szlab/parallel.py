"""Worker-count control for batch-parallel sweeps.

``SZLAB_THREADS`` caps the number of worker threads (default 1, i.e.
sequential).  Batches are always independent tasks whose results are
collected in index order, so the output is identical for any worker count;
parallelism only helps where the work releases the GIL (BLAS kernels, the
compiled eigensolver).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("SZLAB_THREADS", "1").strip()
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"SZLAB_THREADS must be an integer, got {raw!r}") from None
    return max(count, 1)


def map_indexed(fn, items):
    """Apply ``fn`` to each item, in parallel when SZLAB_THREADS > 1.

    Results come back in input order regardless of scheduling.
    """
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

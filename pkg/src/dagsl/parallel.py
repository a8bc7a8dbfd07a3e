"""Replicate-level parallelism with deterministic, index-ordered results."""
from __future__ import annotations

import os

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

THREADS_ENV = "DAGSL_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else ``$DAGSL_THREADS``, else all CPUs."""
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def replicate_seed(seed: int, index: int) -> int:
    """Independent seed for replicate ``index``; unaffected by scheduling."""
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(index)]).generate_state(1)[0])


class _SingleBlas:
    # one BLAS thread per call so serial and pooled runs sum in the same order
    def __init__(self, func):
        self.func = func

    def __call__(self, x):
        with threadpool_limits(limits=1):
            return self.func(x)


def pmap(func, items, threads: int | None = None) -> list:
    """``[func(x) for x in items]``, possibly across worker processes."""
    items = list(items)
    n = min(resolve_threads(threads), len(items))
    call = _SingleBlas(func)
    if n <= 1:
        return [call(x) for x in items]
    return Parallel(n_jobs=n, backend="loky")(delayed(call)(x) for x in items)

import os

import numpy as np


def check_labels(y, n_classes, n_rows=None):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("labels must be a 1-D array")
    if n_rows is not None and y.size != n_rows:
        raise ValueError(f"{y.size} labels for {n_rows} rows")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.mod(y, 1) == 0):
            raise ValueError("labels must be integers")
    y = y.astype(np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    return y


def spawn_seeds(random_state, n):
    """``n`` independent child seeds derived from ``random_state``.

    Work items seeded this way give identical results whether they run
    sequentially or concurrently.
    """
    if isinstance(random_state, np.random.Generator):
        return [np.random.default_rng(random_state.integers(2 ** 63)) for _ in range(n)]
    return np.random.SeedSequence(random_state).spawn(n)


def child_seed(random_state, index):
    """Seed for the ``index``-th derived work item (a stable integer)."""
    ss = np.random.SeedSequence(random_state).spawn(index + 1)[index]
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def worker_count(n_jobs=None):
    """Explicit ``n_jobs`` if given, else ``EMERALD_THREADS``, else 1."""
    if n_jobs is not None:
        return n_jobs
    env = os.environ.get("EMERALD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"EMERALD_THREADS must be an integer, got {env!r}") from None
    return 1

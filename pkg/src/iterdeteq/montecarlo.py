"""Seeded ergodic Monte Carlo harness."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import trial_rng

__all__ = ["McReport", "ergodic_mc", "worker_count"]


@dataclass(frozen=True)
class McReport:
    """Sample statistics of a per-trial metric.

    ``mean``, ``std`` and ``stderr`` are floats for scalar metrics and
    arrays for vector-valued ones. ``std`` is the unbiased (ddof=1)
    sample standard deviation and ``stderr = std / sqrt(trials)``.
    """

    mean: object
    std: object
    stderr: object
    trials: int
    seed: int

    def __eq__(self, other):
        if not isinstance(other, McReport):
            return NotImplemented
        return (
            self.trials == other.trials
            and self.seed == other.seed
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.std, other.std)
        )


def worker_count(default=1):
    """Number of workers allowed by the ``DETEQ_THREADS`` environment variable."""
    raw = os.environ.get("DETEQ_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def _run_chunk(metric, seed, trials):
    return [np.asarray(metric(trial_rng(seed, t)), dtype=float) for t in trials]


def ergodic_mc(metric, trials, seed, workers=None):
    """Average ``metric(rng)`` over independent trials.

    Trial ``t`` receives the generator ``trial_rng(seed, t)``, so the
    report depends only on ``(metric, trials, seed)``: the worker count
    changes the schedule, never the numbers. Per-trial values are stacked
    in trial order before reduction (numpy's pairwise summation).

    Parameters
    ----------
    metric : callable
        Maps a ``numpy.random.Generator`` to a float or an array of floats.
    trials : int
        Number of independent realizations, at least 2.
    seed : int
        Master seed.
    workers : int, optional
        Thread count; defaults to ``DETEQ_THREADS`` (1 if unset).
    """
    trials = int(trials)
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard deviation")
    workers = worker_count() if workers is None else max(1, int(workers))
    idx = range(trials)
    if workers == 1:
        values = _run_chunk(metric, seed, idx)
    else:
        chunks = [idx[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ch: _run_chunk(metric, seed, ch), chunks))
        values = [None] * trials
        for ch, part in zip(chunks, parts):
            for t, v in zip(ch, part):
                values[t] = v
    data = np.stack(values)
    mean = data.mean(axis=0)
    std = data.std(axis=0, ddof=1)
    stderr = std / np.sqrt(trials)
    if data.ndim == 1:
        mean, std, stderr = float(mean), float(std), float(stderr)
    return McReport(mean=mean, std=std, stderr=stderr, trials=trials, seed=int(seed))

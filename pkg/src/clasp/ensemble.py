"""Ensembles of score profiles over randomly drawn temporal constraints.

Every iteration draws an interval of the series, scores it on its own, adds
a confidence term proportional to the interval length and max-merges the
result into the profile of the full series. Local splits closer than
``edge * w`` samples to either end of their interval are not merged: there
one side holds only a few windows, and their overlapping neighbours make it
look separable even in noise. Each iteration draws from its
own generator seeded by ``(seed, iteration)``, so the outcome does not
depend on the order in which iterations run.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .knn import KnnIndex
from .profile import ROC_AUC, Profile, calc_clasp, min_length
from .series import as_series

THREADS_ENV = "CLASP_NUM_THREADS"


def num_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise InvalidParameterError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class EnsembleConfig:
    n_iter: int = 30
    seed: int = 2357
    min_interval: int | None = None  # None means the shortest scoreable length
    k: int = 3
    scorer: str = ROC_AUC
    edge: int = 10  # local splits keep at least edge * w samples on each side

    def __post_init__(self):
        if self.n_iter < 0:
            raise InvalidParameterError("n_iter must be >= 0")
        if self.edge < 0:
            raise InvalidParameterError("edge must be >= 0")


@dataclass(frozen=True)
class EnsembleProfile(Profile):
    """Profile plus provenance of every score.

    ``source[i]`` is -1 where the full-series profile won and otherwise the
    iteration whose interval produced the score; ``intervals[it]`` is the
    ``(start, stop)`` drawn in iteration ``it``, or None if it was skipped.
    ``local_knn[it]`` is the neighbour index built on that interval.
    """

    source: np.ndarray = None
    intervals: tuple = ()
    local_knn: tuple = field(default=(), repr=False, compare=False)

    def interval_of(self, offset: int) -> tuple[int, int]:
        src = int(self.source[offset])
        if src < 0:
            return 0, self.scores.size
        return self.intervals[src]

    def knn_of(self, offset: int) -> tuple[KnnIndex, int]:
        """Neighbour index that produced the score at ``offset``, and its start."""
        src = int(self.source[offset])
        if src < 0:
            return self.knn, 0
        return self.local_knn[src], self.intervals[src][0]


def sample_interval(n: int, min_len: int, seed: int, iteration: int) -> tuple[int, int] | None:
    """Draw the interval of one iteration, or None if it is too short."""
    if min_len > n:
        return None
    rng = np.random.default_rng([seed, iteration])
    start = int(rng.integers(0, n))
    length = int(rng.integers(min_len, n + 1))
    stop = min(start + length, n)
    if stop - start < min_len:
        return None
    return start, stop


def _local(ts, w, interval, cfg):
    start, stop = interval
    local = calc_clasp(ts[start:stop], w, cfg.k, cfg.scorer)
    weight = (stop - start) / ts.size
    lo = max(local.begin, cfg.edge * w)
    hi = min(local.end, local.scores.size - cfg.edge * w)
    values = (2.0 * local.scores[lo:hi] + weight) / 3.0
    return values, start + lo, local.knn


def calc_clasp_ensemble(ts, w: int, config: EnsembleConfig | None = None, threads: int | None = None) -> EnsembleProfile:
    """Score profile of ``ts`` max-merged with ``config.n_iter`` local profiles."""
    cfg = config or EnsembleConfig()
    ts = as_series(ts)
    n = ts.size
    base = calc_clasp(ts, w, cfg.k, cfg.scorer)
    min_len = max(min_length(w, cfg.k), 2 * cfg.edge * w + 1, cfg.min_interval or 0)

    intervals = tuple(sample_interval(n, min_len, cfg.seed, it) for it in range(cfg.n_iter))
    todo = [(it, iv) for it, iv in enumerate(intervals) if iv is not None]

    threads = num_threads() if threads is None else threads
    if threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: _local(ts, w, job[1], cfg), todo))
    else:
        results = [_local(ts, w, iv, cfg) for _, iv in todo]

    scores = base.scores.copy()
    source = np.full(n, -1, dtype=np.int64)
    local_knn = [None] * cfg.n_iter
    # merge in iteration order; a later iteration must be strictly better
    for (it, _), (values, offset, knn) in zip(todo, results):
        local_knn[it] = knn
        target = scores[offset : offset + values.size]
        better = values > target
        target[better] = values[better]
        source[offset : offset + values.size][better] = it
    scores.setflags(write=False)
    return EnsembleProfile(
        scores, w, base.begin, base.end, base.knn,
        source=source, intervals=intervals, local_knn=tuple(local_knn),
    )

"""Window size selection by summary statistics matching (SuSS).

A candidate width ``w`` scores high when the rolling mean, std and range of
its windows sit close to the statistics of the whole (min-max scaled)
series. The smallest width whose score reaches a threshold is selected.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .series import SummaryStats, as_series, minmax_scale, rolling_stats

logger = logging.getLogger(__name__)


class SussWarning(UserWarning):
    """No width reached the threshold, or the series is degenerate."""


@dataclass(frozen=True)
class SussConfig:
    threshold: float = 0.89
    lower: int = 10
    upper: int | None = None  # None means floor(n / 2)

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise InvalidParameterError("threshold must lie in (0, 1)")
        if self.lower < 1:
            raise InvalidParameterError("lower bound must be >= 1")
        if self.upper is not None and self.upper < self.lower:
            raise InvalidParameterError("upper bound must be >= lower bound")


def global_stats(scaled) -> SummaryStats:
    """Reference statistics of a min-max scaled series; range is fixed at 1."""
    scaled = np.asarray(scaled, dtype=np.float64)
    return SummaryStats(float(scaled.mean()), float(scaled.std()), 1.0)


def stats_diff(ts, w: int, stats: SummaryStats) -> float:
    """Mean distance between rolling window statistics and ``stats``.

    Each window's distance is divided by ``sqrt(w)``.
    """
    roll = rolling_stats(ts, w)
    dist = np.sqrt(
        (roll.mean - stats.mean) ** 2
        + (roll.std - stats.std) ** 2
        + (roll.range - stats.range) ** 2
    )
    return float(np.mean(dist) / np.sqrt(w))


class _Scorer:
    """Caches the two scaling anchors shared by every candidate width."""

    def __init__(self, scaled: np.ndarray, stats: SummaryStats):
        self.ts = scaled
        self.stats = stats
        self.s_min = stats_diff(scaled, scaled.size, stats)
        self.s_max = stats_diff(scaled, 1, stats)
        self.evaluated: dict[int, float] = {}

    @property
    def degenerate(self) -> bool:
        # a constant series still has s_max > s_min because the reference
        # range is fixed at 1, but no width describes it better than another
        return self.s_max == self.s_min or bool(np.ptp(self.ts) == 0)

    def __call__(self, w: int) -> float:
        if w not in self.evaluated:
            if self.degenerate:
                score = 1.0
            else:
                diff = stats_diff(self.ts, w, self.stats)
                score = 1.0 - (diff - self.s_min) / (self.s_max - self.s_min)
                score = min(max(score, 0.0), 1.0)
            self.evaluated[w] = score
        return self.evaluated[w]


def suss_score(ts, w: int, stats: SummaryStats | None = None) -> float:
    """Score of width ``w`` in [0, 1]; 0 at ``w = 1`` and 1 at ``w = n``.

    ``ts`` is expected to be min-max scaled already. When ``stats`` is
    omitted it is derived from ``ts``.
    """
    ts = np.asarray(ts, dtype=np.float64)
    if stats is None:
        stats = global_stats(ts)
    if not 1 <= w <= ts.size:
        raise InvalidParameterError(f"window size must be in [1, {ts.size}], got {w}")
    return _Scorer(ts, stats)(w)


def calc_suss(ts, config: SussConfig | None = None) -> int:
    """Learn a window size for ``ts``.

    Doubles the width starting from ``config.lower`` until the score reaches
    the threshold, then binary searches the bracketing interval for the
    smallest qualifying width. Returns the upper bound (with a
    :class:`SussWarning`) if no width qualifies and the lower bound if the
    series is degenerate.
    """
    config = config or SussConfig()
    ts = as_series(ts)
    n = ts.size
    if n < 4 * config.lower:
        raise InvalidParameterError(
            f"series of length {n} is too short for window search "
            f"(need at least {4 * config.lower})"
        )
    lower = config.lower
    upper = n // 2 if config.upper is None else min(config.upper, n)
    if upper < lower:
        raise InvalidParameterError("upper bound below lower bound for this series")

    scaled = minmax_scale(ts)
    score = _Scorer(scaled, global_stats(scaled))
    if score.degenerate:
        warnings.warn("degenerate series, using the lower window bound", SussWarning, stacklevel=2)
        return lower

    t = config.threshold
    if score(lower) >= t:
        return lower

    # exponential search: lo fails, hi passes (or hi == upper)
    lo, hi = lower, min(2 * lower, upper)
    while score(hi) < t:
        if hi == upper:
            warnings.warn(
                f"no window size in [{lower}, {upper}] reaches threshold {t}",
                SussWarning,
                stacklevel=2,
            )
            return upper
        lo, hi = hi, min(2 * hi, upper)

    while hi - lo > 1:
        mid = (lo + hi) // 2
        if score(mid) >= t:
            hi = mid
        else:
            lo = mid
    logger.debug("suss evaluated %d widths, picked %d", len(score.evaluated), hi)
    return hi

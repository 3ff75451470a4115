"""Time series primitives: validation, windowing, rolling statistics.

All offsets are 0-based. Window ``j`` of width ``w`` covers ``ts[j:j + w]``.
"""

from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import InvalidParameterError

ZNORM_EPS = 1e-8
# rolling moments are recomputed from scratch every REFRESH offsets
REFRESH = 256


class SummaryStats(NamedTuple):
    """Mean, standard deviation and range.

    Holds scalars for a whole series or equally sized arrays for rolling
    windows (one entry per window offset).
    """

    mean: float | np.ndarray
    std: float | np.ndarray
    range: float | np.ndarray


def as_series(values) -> np.ndarray:
    """Validate ``values`` and return them as a read-only float64 array.

    Raises
    ------
    InvalidParameterError
        If the input is empty, not one-dimensional, or holds NaN/Inf.
    """
    ts = np.array(values, dtype=np.float64)
    if ts.ndim != 1:
        raise InvalidParameterError(f"expected a 1-D series, got shape {ts.shape}")
    if ts.size == 0:
        raise InvalidParameterError("series is empty")
    bad = ~np.isfinite(ts)
    if bad.any():
        raise InvalidParameterError(
            f"series contains non-finite value at offset {int(np.argmax(bad))}"
        )
    ts.setflags(write=False)
    return ts


def _check_width(n: int, w: int) -> None:
    if not 1 <= w <= n:
        raise InvalidParameterError(f"window size must be in [1, {n}], got {w}")


def n_windows(n: int, w: int) -> int:
    _check_width(n, w)
    return n - w + 1


def windows(ts, w: int) -> np.ndarray:
    """All ``n - w + 1`` overlapping windows as a read-only ``(m, w)`` view."""
    ts = np.asarray(ts, dtype=np.float64)
    _check_width(ts.size, w)
    return sliding_window_view(ts, w)


def znormalize(values, eps: float = ZNORM_EPS) -> np.ndarray:
    """Z-normalize a window; windows with std below ``eps`` map to zeros."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InvalidParameterError("cannot z-normalize an empty window")
    if eps <= 0:
        raise InvalidParameterError("eps must be positive")
    std = values.std()
    if std < eps:
        return np.zeros_like(values)
    return (values - values.mean()) / std


def summary_stats(ts) -> SummaryStats:
    ts = np.asarray(ts, dtype=np.float64)
    return SummaryStats(float(ts.mean()), float(ts.std()), float(ts.max() - ts.min()))


@numba.njit(cache=True, nogil=True)
def _rolling_moments(x, w, refresh):
    m = x.size - w + 1
    mean = np.empty(m)
    var = np.empty(m)
    mu = 0.0
    m2 = 0.0
    for i in range(m):
        if i % refresh == 0:
            # exact two-pass restart bounds the drift of the updates
            mu = 0.0
            for t in range(i, i + w):
                mu += x[t]
            mu /= w
            m2 = 0.0
            for t in range(i, i + w):
                m2 += (x[t] - mu) ** 2
        else:
            x_in = x[i + w - 1]
            x_out = x[i - 1]
            old = mu
            mu = old + (x_in - x_out) / w
            m2 += (x_in - x_out) * (x_in - mu + x_out - old)
        mean[i] = mu
        var[i] = max(m2 / w, 0.0)
    return mean, var


def rolling_stats(ts, w: int) -> SummaryStats:
    """Mean, population std and range of every width-``w`` window.

    Mean and variance are updated as the window slides (add one value,
    drop one) and recomputed exactly every :data:`REFRESH` offsets; a
    constant stretch therefore has exactly zero std.
    """
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    n = ts.size
    _check_width(n, w)
    mean, var = _rolling_moments(ts, w, REFRESH)

    # centred filters: output[i] covers x[i - w//2 : i - w//2 + w]
    half = w // 2
    hi = maximum_filter1d(ts, size=w, mode="nearest")[half : half + n - w + 1]
    lo = minimum_filter1d(ts, size=w, mode="nearest")[half : half + n - w + 1]
    return SummaryStats(mean, np.sqrt(var), hi - lo)


def minmax_scale(ts) -> np.ndarray:
    """Affinely map values onto [0, 1]; a constant series maps to zeros."""
    ts = np.asarray(ts, dtype=np.float64)
    lo, hi = ts.min(), ts.max()
    if hi == lo:
        return np.zeros_like(ts)
    return (ts - lo) / (hi - lo)

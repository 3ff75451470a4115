"""k-nearest-neighbour index over z-normalized windows.

Distances follow the dot-product identity

    d(a, b)^2 = 2 w (1 - corr(a, b))

with sliding dot products updated along the diagonals of the (never
materialized) distance matrix. Windows whose std falls below
:data:`~clasp.series.ZNORM_EPS` are treated as the zero vector: two such
windows are at distance 0, and one such window is at distance ``sqrt(w)``
from any other window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidParameterError
from .series import ZNORM_EPS, as_series, n_windows

# exact dot products are recomputed every REFRESH steps along a diagonal
REFRESH = 256


def exclusion_radius(w: int) -> int:
    """Neighbours ``j`` of window ``i`` need ``|i - j| >= ceil(w / 2)``."""
    return max(1, math.ceil(w / 2))


@numba.njit(cache=True, nogil=True)
def _window_moments(x, w):
    m = x.size - w + 1
    mu = np.empty(m)
    sig = np.empty(m)
    for i in range(m):
        s = 0.0
        for t in range(w):
            s += x[i + t]
        mean = s / w
        ss = 0.0
        for t in range(w):
            d = x[i + t] - mean
            ss += d * d
        mu[i] = mean
        sig[i] = math.sqrt(ss / w)
    return mu, sig


@numba.njit(cache=True, nogil=True)
def _pair_dist2(qt, i, j, w, mu, sig, flat):
    if flat[i] and flat[j]:
        return 0.0
    if flat[i] or flat[j]:
        return float(w)
    rho = (qt - w * mu[i] * mu[j]) / (w * sig[i] * sig[j])
    if rho > 1.0:
        rho = 1.0
    elif rho < -1.0:
        rho = -1.0
    return 2.0 * w * (1.0 - rho)


@numba.njit(cache=True, nogil=True)
def _dot(x, i, j, w):
    s = 0.0
    for t in range(w):
        s += x[i + t] * x[j + t]
    return s


@numba.njit(cache=True, nogil=True)
def _insert(dist, idx, row, d2, j):
    k = dist.shape[1]
    last = k - 1
    if d2 > dist[row, last] or (d2 == dist[row, last] and j > idx[row, last]):
        return
    pos = last
    while pos > 0 and (
        d2 < dist[row, pos - 1] or (d2 == dist[row, pos - 1] and j < idx[row, pos - 1])
    ):
        dist[row, pos] = dist[row, pos - 1]
        idx[row, pos] = idx[row, pos - 1]
        pos -= 1
    dist[row, pos] = d2
    idx[row, pos] = j


@numba.njit(cache=True, nogil=True)
def _knn_kernel(x, w, k, radius, mu, sig, flat):
    m = x.size - w + 1
    dist = np.full((m, k), np.inf)
    idx = np.full((m, k), m, dtype=np.int64)
    # rho = (qt - w mu_i mu_j) * scale_i * scale_j with scale = 1 / (sqrt(w) sig)
    scale = np.zeros(m)
    any_flat = False
    for i in range(m):
        if flat[i]:
            any_flat = True
        else:
            scale[i] = 1.0 / (math.sqrt(w) * sig[i])
    wmu = w * mu
    two_w = 2.0 * w
    for d in range(radius, m):
        qt = 0.0
        fresh = 0
        for i in range(m - d):
            j = i + d
            if fresh == 0:
                qt = _dot(x, i, j, w)
                fresh = REFRESH
            else:
                qt += x[i + w - 1] * x[j + w - 1] - x[i - 1] * x[j - 1]
            fresh -= 1
            if any_flat and (flat[i] or flat[j]):
                d2 = 0.0 if flat[i] and flat[j] else float(w)
            else:
                rho = (qt - wmu[i] * mu[j]) * scale[i] * scale[j]
                if rho > 1.0:
                    rho = 1.0
                elif rho < -1.0:
                    rho = -1.0
                d2 = two_w * (1.0 - rho)
            if d2 <= dist[i, k - 1]:
                _insert(dist, idx, i, d2, j)
            if d2 <= dist[j, k - 1]:
                _insert(dist, idx, j, d2, i)
    return idx, dist


@numba.njit(cache=True, nogil=True)
def _distance_matrix_kernel(x, w, radius, mu, sig, flat):
    m = x.size - w + 1
    out = np.full((m, m), np.inf)
    for d in range(radius, m):
        qt = 0.0
        for i in range(m - d):
            j = i + d
            if i % REFRESH == 0:
                qt = _dot(x, i, j, w)
            else:
                qt += x[i + w - 1] * x[j + w - 1] - x[i - 1] * x[j - 1]
            v = math.sqrt(_pair_dist2(qt, i, j, w, mu, sig, flat))
            out[i, j] = v
            out[j, i] = v
    return out


def _prepare(ts, w):
    x = as_series(ts)
    n_windows(x.size, w)
    # distances are shift invariant; centring limits cancellation
    x = x - x.mean()
    mu, sig = _window_moments(x, w)
    return x, mu, sig, sig < ZNORM_EPS


@dataclass(frozen=True)
class KnnIndex:
    """Nearest-neighbour offsets of every window, plus the reverse relation.

    ``offsets[i]`` lists the ``k`` nearest windows of window ``i`` sorted by
    distance (ties by smaller offset). The reverse relation is stored in CSR
    form: the windows that have ``j`` among their neighbours are
    ``fanin[fanin_ptr[j]:fanin_ptr[j + 1]]``.
    """

    window_size: int
    k: int
    radius: int
    offsets: np.ndarray
    distances: np.ndarray
    fanin_ptr: np.ndarray
    fanin: np.ndarray

    @property
    def n_windows(self) -> int:
        return self.offsets.shape[0]

    def fanin_of(self, j: int) -> np.ndarray:
        return self.fanin[self.fanin_ptr[j] : self.fanin_ptr[j + 1]]


def _reverse(offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m, k = offsets.shape
    flat = offsets.ravel()
    order = np.argsort(flat, kind="stable")
    fanin = (order // k).astype(np.int64)
    counts = np.bincount(flat, minlength=m)
    ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, fanin


def min_windows(w: int, k: int) -> int:
    return k + 2 * exclusion_radius(w)


def knn_profile(ts, w: int, k: int = 3) -> KnnIndex:
    """Build the k-NN index for all width-``w`` windows of ``ts``."""
    if k < 1 or k % 2 == 0:
        raise InvalidParameterError(f"k must be a positive odd number, got {k}")
    x, mu, sig, flat = _prepare(ts, w)
    m = x.size - w + 1
    radius = exclusion_radius(w)
    if m < min_windows(w, k):
        raise InvalidParameterError(
            f"{m} windows are too few for k={k} with exclusion radius {radius}"
        )
    idx, d2 = _knn_kernel(x, w, k, radius, mu, sig, flat)
    ptr, fanin = _reverse(idx)
    return KnnIndex(w, k, radius, idx, np.sqrt(d2), ptr, fanin)


def distance_matrix_row(ts, w: int, i: int) -> np.ndarray:
    """Distances from window ``i`` to every window, exclusion zone set to inf.

    Uses one sliding dot product (``O(m w)``); intended for inspection and
    testing, the index itself never builds rows.
    """
    x, mu, sig, flat = _prepare(ts, w)
    m = mu.size
    if not 0 <= i < m:
        raise InvalidParameterError(f"window offset {i} out of range [0, {m})")
    qt = sliding_window_view(x, w) @ x[i : i + w]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.clip((qt - w * mu[i] * mu) / (w * sig[i] * sig), -1.0, 1.0)
        d2 = 2.0 * w * (1.0 - rho)
    if flat[i]:
        d2 = np.where(flat, 0.0, float(w))
    else:
        d2 = np.where(flat, float(w), d2)
    row = np.sqrt(d2)
    radius = exclusion_radius(w)
    row[max(0, i - radius + 1) : i + radius] = np.inf
    return row


def distance_matrix(ts, w: int) -> np.ndarray:
    """Full ``m x m`` distance matrix via the diagonal recurrence.

    Quadratic memory; only meant for small inputs and for checking the
    streaming kernel.
    """
    x, mu, sig, flat = _prepare(ts, w)
    return _distance_matrix_kernel(x, w, exclusion_radius(w), mu, sig, flat)

"""Segmentation quality: margin F1 over change points and Covering.

Change points are offsets strictly inside ``(0, n)``. For Covering the
series locations are numbered ``1..n`` with sentinel boundaries ``0`` and
``n + 1``; a change point ``c`` closes the segment ``[prev, c)`` and opens
``[c, next)``.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError


def as_cps(cps, n: int) -> np.ndarray:
    """Validate a change point set against series length ``n``."""
    arr = np.asarray(sorted(int(c) for c in cps), dtype=np.int64)
    if n < 1:
        raise InvalidParameterError(f"series length must be >= 1, got {n}")
    if arr.size and (arr[0] <= 0 or arr[-1] >= n):
        raise InvalidParameterError(f"change points must lie in (0, {n}), got {arr.tolist()}")
    if np.any(np.diff(arr) == 0):
        raise InvalidParameterError("change points must be distinct")
    return arr


def margin(n: int, fraction: float = 0.01) -> int:
    return int(np.floor(fraction * n))


def match_count(truth, pred, tolerance: int) -> int:
    """Greedy one-to-one matching within ``tolerance``.

    Truth change points are visited in ascending order; each takes the
    nearest unmatched prediction in range, preferring the left one on ties.
    """
    used = np.zeros(len(pred), dtype=bool)
    tp = 0
    for t in truth:
        best = -1
        for j, p in enumerate(pred):
            if used[j] or abs(p - t) > tolerance:
                continue
            if best < 0 or abs(p - t) < abs(pred[best] - t):
                best = j
        if best >= 0:
            used[best] = True
            tp += 1
    return tp


def f1_score(truth, pred, n: int, margin_fraction: float = 0.01) -> float:
    truth = as_cps(truth, n)
    pred = as_cps(pred, n)
    if truth.size == 0 and pred.size == 0:
        return 1.0
    if truth.size == 0 or pred.size == 0:
        return 0.0
    tp = match_count(truth, pred, margin(n, margin_fraction))
    if tp == 0:
        return 0.0
    precision = tp / pred.size
    recall = tp / truth.size
    return 2 * precision * recall / (precision + recall)


def _segments(cps: np.ndarray, n: int) -> np.ndarray:
    """Half-open location ranges ``[lo, hi)`` clipped to ``1..n``."""
    bounds = np.concatenate(([0], cps, [n + 1]))
    lo = np.maximum(bounds[:-1], 1)
    hi = np.minimum(bounds[1:], n + 1)
    return np.column_stack((lo, hi))


def covering_score(truth, pred, n: int) -> float:
    """Length-weighted best Jaccard overlap of truth segments with predictions."""
    truth = as_cps(truth, n)
    pred = as_cps(pred, n)
    segs_t = _segments(truth, n)
    segs_p = _segments(pred, n)
    total = 0.0
    for lo, hi in segs_t:
        size = hi - lo
        if size <= 0:
            continue
        inter = np.clip(np.minimum(hi, segs_p[:, 1]) - np.maximum(lo, segs_p[:, 0]), 0, None)
        union = (hi - lo) + (segs_p[:, 1] - segs_p[:, 0]) - inter
        total += size * float(np.max(inter / union))
    return total / n

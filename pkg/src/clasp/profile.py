"""Classification score profile.

A hypothetical split at offset ``i`` labels every window that ends before
``i`` (``j <= i - w``) with 0 and all others with 1. Each window is then
classified by the majority label of its k nearest neighbours and the
predictions are scored against the split labels. Sliding the split by one
flips exactly one label, so the sweep only revisits the windows that list
the flipped one as a neighbour.

Confusion counts are kept as a 2x2 integer matrix ``conf[true, pred]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidParameterError, SeriesTooShortError
from .knn import KnnIndex, knn_profile, min_windows
from .series import as_series

ROC_AUC = "roc_auc"
MACRO_F1 = "macro_f1"
SCORERS = (ROC_AUC, MACRO_F1)
_SCORER_IDS = {ROC_AUC: 0, MACRO_F1: 1}


@numba.njit(cache=True, nogil=True)
def score_roc_auc(conf):
    """Area under the ROC curve of hard 0/1 predictions.

    With a single threshold the curve has one interior point and the area
    reduces to the mean of the true positive and true negative rates. An
    empty class yields 0.5.
    """
    pos = conf[1, 0] + conf[1, 1]
    neg = conf[0, 0] + conf[0, 1]
    if pos == 0 or neg == 0:
        return 0.5
    return 0.5 * (conf[1, 1] / pos + conf[0, 0] / neg)


@numba.njit(cache=True, nogil=True)
def score_macro_f1(conf):
    """Unweighted mean of the per-class F1 scores; empty classes count 0."""
    total = 0.0
    for c in range(2):
        tp = conf[c, c]
        fp = conf[1 - c, c]
        fn = conf[c, 1 - c]
        denom = 2 * tp + fp + fn
        if denom > 0:
            total += 2.0 * tp / denom
    return total / 2.0


@numba.njit(cache=True, nogil=True)
def _score(conf, scorer):
    if scorer == 0:
        return score_roc_auc(conf)
    return score_macro_f1(conf)


@numba.njit(cache=True, nogil=True)
def _init(offsets, w, split, labels, pos, pred, conf):
    m, k = offsets.shape
    for j in range(m):
        labels[j] = 0 if j <= split - w else 1
    conf[:, :] = 0
    for j in range(m):
        c = 0
        for t in range(k):
            c += labels[offsets[j, t]]
        pos[j] = c
        pred[j] = 1 if 2 * c > k else 0
        conf[labels[j], pred[j]] += 1


@numba.njit(cache=True, nogil=True)
def _advance(fanin_ptr, fanin, k, w, split, labels, pos, pred, conf):
    """Move the split from ``split`` to ``split + 1``."""
    f = split + 1 - w
    conf[1, pred[f]] -= 1
    conf[0, pred[f]] += 1
    labels[f] = 0
    for p in range(fanin_ptr[f], fanin_ptr[f + 1]):
        g = fanin[p]
        pos[g] -= 1
        if pred[g] == 1 and 2 * pos[g] < k:
            pred[g] = 0
            conf[labels[g], 1] -= 1
            conf[labels[g], 0] += 1


@numba.njit(cache=True, nogil=True)
def _sweep(offsets, fanin_ptr, fanin, w, n, scorer):
    m, k = offsets.shape
    labels = np.empty(m, dtype=np.int64)
    pos = np.empty(m, dtype=np.int64)
    pred = np.empty(m, dtype=np.int64)
    conf = np.zeros((2, 2), dtype=np.int64)
    out = np.zeros(n)
    begin, end = w + 1, n - w - 1
    _init(offsets, w, begin, labels, pos, pred, conf)
    out[begin] = _score(conf, scorer)
    for split in range(begin, end - 1):
        _advance(fanin_ptr, fanin, k, w, split, labels, pos, pred, conf)
        out[split + 1] = _score(conf, scorer)
    return out


def valid_range(n: int, w: int) -> tuple[int, int]:
    """Half-open range of scored split offsets, ``[w + 1, n - w - 1)``."""
    return w + 1, n - w - 1


def min_length(w: int, k: int = 3) -> int:
    """Shortest series that ``calc_clasp`` accepts for window size ``w``."""
    return max(2 * (w + 2), min_windows(w, k) + w - 1)


def _scorer_id(scorer: str) -> int:
    try:
        return _SCORER_IDS[scorer]
    except KeyError:
        raise InvalidParameterError(
            f"unknown scorer {scorer!r}, expected one of {SCORERS}"
        ) from None


class SplitState:
    """Labels, neighbour votes and confusion counts at one split offset.

    Not safe to share between threads.
    """

    def __init__(self, knn: KnnIndex, n: int, split: int | None = None, scorer: str = ROC_AUC):
        w = knn.window_size
        self.knn = knn
        self.n = n
        self.begin, self.end = valid_range(n, w)
        self.split = self.begin if split is None else split
        if not self.begin <= self.split < self.end:
            raise InvalidParameterError(
                f"split {self.split} outside valid range [{self.begin}, {self.end})"
            )
        self._scorer = _scorer_id(scorer)
        m = knn.n_windows
        self.labels = np.empty(m, dtype=np.int64)
        self.positive = np.empty(m, dtype=np.int64)
        self.predicted = np.empty(m, dtype=np.int64)
        self.confusion = np.zeros((2, 2), dtype=np.int64)
        _init(knn.offsets, w, self.split, self.labels, self.positive, self.predicted, self.confusion)

    def score(self) -> float:
        return float(_score(self.confusion, self._scorer))

    def advance(self) -> float:
        """Move the split one offset to the right and return the new score.

        Raises StopIteration once the split would leave the valid range.
        """
        if self.split + 1 >= self.end:
            raise StopIteration
        knn = self.knn
        _advance(
            knn.fanin_ptr, knn.fanin, knn.k, knn.window_size, self.split,
            self.labels, self.positive, self.predicted, self.confusion,
        )
        self.split += 1
        return self.score()


def init_split_state(knn: KnnIndex, n: int, split: int | None = None, scorer: str = ROC_AUC) -> SplitState:
    return SplitState(knn, n, split, scorer)


def advance_split(state: SplitState) -> float:
    return state.advance()


def predictions_at(knn: KnnIndex, split: int) -> tuple[np.ndarray, np.ndarray]:
    """Split labels and majority-vote predictions for one split offset."""
    m = knn.n_windows
    labels = (np.arange(m) > split - knn.window_size).astype(np.int64)
    votes = labels[knn.offsets].sum(axis=1)
    return labels, (2 * votes > knn.k).astype(np.int64)


@dataclass(frozen=True)
class Profile:
    """Scores for every offset of a series; zero outside ``[begin, end)``.

    ``knn`` is the neighbour index the scores were computed from.
    """

    scores: np.ndarray
    window_size: int
    begin: int
    end: int
    knn: KnnIndex | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return self.scores.size

    def argmax(self) -> int:
        """Offset of the highest score in the valid range (first on ties)."""
        return self.begin + int(np.argmax(self.scores[self.begin : self.end]))

    def max(self) -> float:
        return float(self.scores[self.argmax()])


def calc_clasp(ts, w: int, k: int = 3, scorer: str = ROC_AUC, knn: KnnIndex | None = None) -> Profile:
    """Classification score profile of ``ts`` for window size ``w``.

    Raises
    ------
    SeriesTooShortError
        If no split offset can be scored.
    """
    ts = as_series(ts)
    n = ts.size
    if w < 1:
        raise InvalidParameterError(f"window size must be >= 1, got {w}")
    if n < min_length(w, k):
        raise SeriesTooShortError(
            f"series of length {n} has no valid split for window size {w} "
            f"(need at least {min_length(w, k)})"
        )
    sid = _scorer_id(scorer)
    if knn is None:
        knn = knn_profile(ts, w, k)
    scores = _sweep(knn.offsets, knn.fanin_ptr, knn.fanin, w, n, sid)
    scores.setflags(write=False)
    begin, end = valid_range(n, w)
    return Profile(scores, w, begin, end, knn)

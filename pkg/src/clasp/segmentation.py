"""Recursive segmentation driven by a max-priority queue of candidates.

The best split of the whole series is found first; each accepted change
point splits its range in two, and the best split of each half becomes a
new candidate. In learned mode a candidate must pass the rank-sum test; in
fixed mode the test is only reported and the search stops after ``C - 1``
change points.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleConfig, EnsembleProfile, calc_clasp_ensemble
from .errors import InvalidParameterError, SeriesTooShortError
from .profile import min_length, predictions_at
from .series import as_series
from .suss import SussConfig, calc_suss
from .validation import ValidationConfig, validate_candidate

logger = logging.getLogger(__name__)

LEARNED = "learned"
FIXED = "fixed"


@dataclass(frozen=True)
class Candidate:
    offset: int
    score: float
    p_value: float
    accepted: bool
    begin: int
    end: int


@dataclass(frozen=True)
class Segmentation:
    """Change points (ascending, 0-based) with their scores and p-values."""

    change_points: np.ndarray
    scores: np.ndarray
    p_values: np.ndarray
    window_size: int
    mode: str
    n_segments: int | None = None
    profile: EnsembleProfile | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return self.change_points.size


def find_candidate(ts, begin: int, end: int, w: int, ensemble: EnsembleConfig,
                   validation: ValidationConfig, learned: bool = True, threads: int | None = None):
    """Best split of ``ts[begin:end]`` in global coordinates, or None.

    Returns ``(candidate, profile)``. The candidate is None when the range is
    too short or, in learned mode, when validation rejects it. The test runs
    on the predictions of the classifier that produced the winning score:
    the whole range, or the ensemble interval whose local profile won.
    """
    if end - begin < min_length(w, ensemble.k):
        return None, None
    sub = ts[begin:end]
    profile = calc_clasp_ensemble(sub, w, ensemble, threads)
    split = profile.argmax()
    knn, start = profile.knn_of(split)
    _, pred = predictions_at(knn, split - start)
    verdict = validate_candidate(pred, split - start, w, validation)
    cand = Candidate(begin + split, profile.max(), verdict.p_value, verdict.accepted, begin, end)
    logger.debug("candidate %s", cand)
    if learned and not cand.accepted:
        return None, profile
    return cand, profile


def _resolve_window(ts, window) -> int:
    if window is None or window == "auto":
        return calc_suss(ts, SussConfig())
    if isinstance(window, SussConfig):
        return calc_suss(ts, window)
    w = int(window)
    if w < 1:
        raise InvalidParameterError(f"window size must be >= 1, got {w}")
    return w


def segment(ts, window=None, n_segments: int | None = None,
            ensemble: EnsembleConfig | None = None, validation: ValidationConfig | None = None,
            threads: int | None = None) -> Segmentation:
    """Segment ``ts``.

    Parameters
    ----------
    window : int, "auto", SussConfig or None
        Window size, or how to learn it (None and "auto" use default SuSS).
    n_segments : int or None
        None learns the number of change points; an integer ``C`` returns at
        most ``C - 1`` change points without statistical gating.
    """
    ts = as_series(ts)
    if n_segments is not None and n_segments < 1:
        raise InvalidParameterError(f"number of segments must be >= 1, got {n_segments}")
    ensemble = ensemble or EnsembleConfig()
    validation = validation or ValidationConfig()
    w = _resolve_window(ts, window)
    n = ts.size
    if n < min_length(w, ensemble.k):
        raise SeriesTooShortError(
            f"series of length {n} is too short for window size {w} "
            f"(need at least {min_length(w, ensemble.k)})"
        )
    learned = n_segments is None
    mode = LEARNED if learned else FIXED
    budget = math.inf if learned else n_segments - 1

    found: list[Candidate] = []
    queue: list = []
    top_profile = None

    def push(begin, end):
        cand, prof = find_candidate(ts, begin, end, w, ensemble, validation, learned, threads)
        if cand is not None:
            heapq.heappush(queue, (-cand.score, cand.offset, cand))
        return prof

    if budget > 0:
        top_profile = push(0, n)
    else:
        # nothing requested; still expose the profile
        top_profile = calc_clasp_ensemble(ts, w, ensemble, threads)

    while queue and len(found) < budget:
        _, _, cand = heapq.heappop(queue)
        found.append(cand)
        if len(found) >= budget:
            break
        push(cand.begin, cand.offset)
        push(cand.offset, cand.end)

    found.sort(key=lambda c: c.offset)
    return Segmentation(
        change_points=np.array([c.offset for c in found], dtype=np.int64),
        scores=np.array([c.score for c in found]),
        p_values=np.array([c.p_value for c in found]),
        window_size=w,
        mode=mode,
        n_segments=n_segments,
        profile=top_profile,
    )

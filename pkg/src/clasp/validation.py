"""Change point validation with the two-sided Wilcoxon rank-sum test.

A candidate split is accepted when the predicted labels of the windows left
of it are distinguishable from those right of it. Large samples use the
normal approximation with tie and continuity correction, evaluated in log
space so that thresholds around 1e-15 and far below stay meaningful. Small
samples (``n1 + n2 <= EXACT_MAX``) use the exact permutation distribution
of the rank sum, because the normal approximation is badly off for the
heavily tied binary inputs seen there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr
from scipy.stats import rankdata

from .errors import InvalidParameterError

EXACT_MAX = 40
_LOG2 = math.log(2.0)
_TINY = math.ulp(0.0)


@dataclass(frozen=True)
class ValidationConfig:
    p_value: float = 1e-15

    def __post_init__(self):
        if not 0 < self.p_value <= 1:
            raise InvalidParameterError("p-value threshold must lie in (0, 1]")


def _groups(left, right):
    left = np.asarray(left, dtype=np.float64).ravel()
    right = np.asarray(right, dtype=np.float64).ravel()
    if left.size == 0 or right.size == 0:
        raise InvalidParameterError("both groups must be nonempty")
    return left, right


def _normal_log_pvalue(left, right) -> float:
    n1, n2 = left.size, right.size
    n = n1 + n2
    ranks = rankdata(np.concatenate((left, right)))
    u = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    _, ties = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(ties.astype(np.float64) ** 3 - ties))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return 0.0
    dev = abs(u - n1 * n2 / 2.0) - 0.5
    if dev <= 0:
        return 0.0
    return min(0.0, _LOG2 + float(log_ndtr(-dev / math.sqrt(var))))


def _exact_log_pvalue(left, right) -> float:
    n1, n2 = left.size, right.size
    # doubled midranks are integers
    ranks2 = np.rint(2 * rankdata(np.concatenate((left, right)))).astype(np.int64)
    total = int(ranks2.sum())
    # ways[c, s]: number of size-c subsets with doubled rank sum s
    ways = np.zeros((n1 + 1, total + 1))
    ways[0, 0] = 1.0
    for r in ranks2:
        ways[1:, r:] += ways[:-1, : total + 1 - r].copy()
    dist = ways[n1]
    sums = np.nonzero(dist)[0]
    centre = n1 * (n1 + n2 + 1)  # doubled expectation of the rank sum
    observed = abs(int(ranks2[:n1].sum()) - centre)
    extreme = np.abs(sums - centre) >= observed
    p = dist[sums[extreme]].sum() / dist[sums].sum()
    return math.log(min(1.0, p))


def ranksum_log_pvalue(left, right, method: str = "auto") -> float:
    """Natural log of the two-sided rank-sum p-value.

    ``method`` is ``"normal"``, ``"exact"`` or ``"auto"`` (exact up to
    ``EXACT_MAX`` pooled values). Returns 0 (p = 1) when all values are
    identical.
    """
    left, right = _groups(left, right)
    if method not in ("auto", "normal", "exact"):
        raise InvalidParameterError(f"unknown method {method!r}")
    if np.all(left == left[0]) and np.all(right == left[0]):
        return 0.0
    if method == "exact" or (method == "auto" and left.size + right.size <= EXACT_MAX):
        return _exact_log_pvalue(left, right)
    return _normal_log_pvalue(left, right)


def ranksum_pvalue(left, right, method: str = "auto") -> float:
    """Two-sided rank-sum p-value in (0, 1].

    Values below the smallest positive double are reported as that double;
    use :func:`ranksum_log_pvalue` for the untruncated magnitude.
    """
    return max(math.exp(ranksum_log_pvalue(left, right, method)), _TINY)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    p_value: float
    log_p_value: float


def validate_candidate(predicted, split: int, w: int, config: ValidationConfig | None = None) -> Verdict:
    """Test the predictions left of ``split`` against those right of it.

    Window ``j`` counts as left when it ends before the split
    (``j <= split - w``), matching the split labels of the profile.
    """
    config = config or ValidationConfig()
    predicted = np.asarray(predicted)
    cut = split - w + 1
    if cut <= 0 or cut >= predicted.size:
        return Verdict(False, 1.0, 0.0)
    log_p = ranksum_log_pvalue(predicted[:cut], predicted[cut:])
    accepted = log_p <= math.log(config.p_value)
    return Verdict(accepted, max(math.exp(log_p), _TINY), log_p)

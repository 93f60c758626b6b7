"""Ambiguity intervals of quality-metric scores over distortion ladders.

For every rung of a ladder the scan walks outward in each direction
until it meets the nearest rung whose difference from the current one is
visible. The interval endpoint is the score of the last rung that was
still indistinguishable, so the interval width is the score distance
within which the metric claims a difference no observer would see. A
scan that exhausts the ladder without finding a visible difference is
censored: the width then reaches to the ladder end and is a lower bound
on the true ambiguity.

Scores enter on the canonical larger-is-better scale and are expected to
be non-increasing along the ladder; small inversions from metric noise
are tolerated and the affected widths clamp at zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from .display import display_model
from .vdp import DEFAULT_PARAMETERS, distinguishable, vdp


@dataclass(frozen=True)
class AmbiguityInterval:
    """Scan result for one ladder rung (1-based index)."""

    rung: int
    score: float
    lower_width: float
    upper_width: float
    lower_censored: bool
    upper_censored: bool


class LadderJndOracle:
    """Pairwise distinguishability over ladder rungs, with memoization.

    Callable with 1-based rung indices; the verdict for each unordered
    pair of rungs is computed from the difference predictor once and
    cached, so repeated scans (several metrics, several k values) reuse
    the same maps.
    """

    def __init__(self, images, vc, params=DEFAULT_PARAMETERS, k=0.01):
        self._luminances = [display_model(img, vc) for img in images]
        self._vc = vc
        self._params = params
        self._k = k
        self._cache = {}

    def __len__(self):
        return len(self._luminances)

    def __call__(self, i, j):
        if i == j:
            return False
        key = (min(i, j), max(i, j))
        if key not in self._cache:
            a = self._luminances[key[0] - 1]
            b = self._luminances[key[1] - 1]
            self._cache[key] = distinguishable(vdp(a, b, self._vc, self._params), self._k)
        return self._cache[key]


def _score_gap(a, b):
    """Non-negative score distance, safe for the +inf sentinel.

    Equal scores (including two sentinels) span zero width; an interval
    endpoint at a sentinel while the rung itself is finite keeps its
    infinite width and is filtered at pooling time.
    """
    if a == b:
        return 0.0
    gap = a - b
    return 0.0 if math.isnan(gap) else max(0.0, gap)


def ambiguity_intervals(scores, jnd):
    """Scan a ladder in both directions around every rung.

    Parameters
    ----------
    scores : sequence of float
        Canonical metric scores of rungs 1..N.
    jnd : callable
        ``jnd(i, j)`` returns True when rungs i and j (1-based) look
        different.

    Returns
    -------
    list of AmbiguityInterval, one per rung in ladder order.
    """
    q = [float(s) for s in scores]
    n = len(q)
    if n < 1:
        raise ValueError("need at least one rung")
    out = []
    for i in range(1, n + 1):
        lower_censored = True
        lower = _score_gap(q[i - 1], q[n - 1])
        for j in range(i + 1, n + 1):
            if jnd(i, j):
                lower = _score_gap(q[i - 1], q[j - 2])
                lower_censored = False
                break
        upper_censored = True
        upper = _score_gap(q[0], q[i - 1])
        for j in range(i - 1, 0, -1):
            if jnd(i, j):
                upper = _score_gap(q[j], q[i - 1])
                upper_censored = False
                break
        out.append(
            AmbiguityInterval(
                rung=i,
                score=q[i - 1],
                lower_width=lower,
                upper_width=upper,
                lower_censored=lower_censored,
                upper_censored=upper_censored,
            )
        )
    return out


def canonical_score_range(scores):
    """(min, max) over finite canonical scores; infinities are sentinels."""
    finite = [s for s in scores if np.isfinite(s)]
    if not finite:
        raise ValueError("no finite scores to derive a range from")
    return min(finite), max(finite)


def normalize_widths(intervals, score_range):
    """Express interval widths as fractions of the metric's output range."""
    lo, hi = score_range
    span = hi - lo
    if not span > 0:
        raise ValueError(f"degenerate score range: {score_range}")
    return [(iv.lower_width / span, iv.upper_width / span) for iv in intervals]


@dataclass(frozen=True)
class AmbiguitySummary:
    """Pooled width statistics for one metric on one distortion."""

    metric: str
    distortion: str
    content_set: tuple
    mean_width: float
    max_width: float
    std_width: float
    sample_count: int
    normalization_range: tuple


def pooled_widths(intervals, score_range):
    """Normalized non-censored widths of both sides, in ladder order.

    Widths touching a non-finite sentinel score are dropped alongside
    the censored ones: the metric offers no usable distance there.
    """
    widths = []
    for iv, (lo_w, up_w) in zip(intervals, normalize_widths(intervals, score_range)):
        if not iv.lower_censored and math.isfinite(lo_w):
            widths.append(lo_w)
        if not iv.upper_censored and math.isfinite(up_w):
            widths.append(up_w)
    return widths


def summarize_widths(metric, distortion, content_set, widths, score_range):
    """Mean/max/std (population) of pooled normalized widths."""
    arr = np.asarray(widths, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty sample: every scan was censored")
    return AmbiguitySummary(
        metric=metric,
        distortion=distortion,
        content_set=tuple(content_set),
        mean_width=float(arr.mean()),
        max_width=float(arr.max()),
        std_width=float(arr.std()),
        sample_count=int(arr.size),
        normalization_range=(float(score_range[0]), float(score_range[1])),
    )


def side_statistics(intervals, score_range):
    """Per-side (lower/upper) width statistics for transparency."""
    norm = normalize_widths(intervals, score_range)
    stats = {}
    for side, picker in (("lower", 0), ("upper", 1)):
        vals = [
            pair[picker]
            for iv, pair in zip(intervals, norm)
            if math.isfinite(pair[picker])
            and not (iv.lower_censored if side == "lower" else iv.upper_censored)
        ]
        arr = np.asarray(vals, dtype=np.float64)
        if arr.size:
            stats[side] = (float(arr.mean()), float(arr.max()), float(arr.std()), int(arr.size))
        else:
            stats[side] = (math.nan, math.nan, math.nan, 0)
    return stats

"""Accuracy statistics and significance tests for metric benchmarking.

Objective scores are compared against subjective ratings through a
four-parameter logistic regression, followed by Pearson/Spearman
correlation and RMSE. Significance machinery: Fisher z comparison of
correlations and a two-sided Mann-Whitney U test (exact for small
samples) for interval-width distributions.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

_FISHER_MIN_N = 4
_EXACT_MW_LIMIT = 400  # exact null distribution while n_x * n_y stays below this


def _normal_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class LogisticFit:
    """Four-parameter logistic curve fitted to (objective, subjective) pairs.

    predicted(Q) = b1 + (b2 - b1) / (1 + exp(-(Q - b3) / b4))
    """

    beta: tuple
    rmse: float
    converged: bool
    iterations: int

    def __call__(self, q):
        b1, b2, b3, b4 = self.beta
        z = (np.asarray(q, dtype=np.float64) - b3) / b4
        return b1 + (b2 - b1) * _sigmoid(z)


def _logistic_jacobian(q, beta):
    b1, b2, b3, b4 = beta
    z = (q - b3) / b4
    g = _sigmoid(z)
    gp = g * (1.0 - g)
    scale = b2 - b1
    j = np.empty((q.size, 4))
    j[:, 0] = 1.0 - g
    j[:, 1] = g
    j[:, 2] = -scale * gp / b4
    j[:, 3] = -scale * gp * (q - b3) / (b4 * b4)
    return j


def fit_logistic(objective, subjective, max_iter=500, rtol=1e-10):
    """Damped Gauss-Newton fit of the four-parameter logistic.

    Start values: b1 = max(S), b2 = min(S), b3 = median(Q),
    b4 = range(Q)/4. Each step is halved until the sum of squared
    residuals does not increase; iteration stops when the relative
    residual change drops below ``rtol`` or after ``max_iter`` rounds.
    """
    q = np.asarray(objective, dtype=np.float64)
    s = np.asarray(subjective, dtype=np.float64)
    if q.shape != s.shape or q.ndim != 1:
        raise ValueError("objective and subjective must be 1-D and equally long")
    if q.size < 5:
        raise ValueError("need at least 5 points for a 4-parameter fit")
    if not np.isfinite(q).all() or not np.isfinite(s).all():
        raise ValueError("non-finite values in fit input")
    span = float(q.max() - q.min())
    if span == 0.0:
        raise ValueError("objective scores are constant; logistic fit undefined")
    beta = np.array([s.max(), s.min(), float(np.median(q)), span / 4.0])

    def ssr(b):
        fit = LogisticFit(tuple(b), 0.0, False, 0)
        r = fit(q) - s
        return float(r @ r)

    current = ssr(beta)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        fit = LogisticFit(tuple(beta), 0.0, False, 0)
        residual = fit(q) - s
        jac = _logistic_jacobian(q, beta)
        step, *_ = np.linalg.lstsq(jac, -residual, rcond=None)
        trial = beta + step
        trial_ssr = ssr(trial) if abs(trial[3]) > 1e-300 else math.inf
        halvings = 0
        while trial_ssr > current and halvings < 30:
            step *= 0.5
            trial = beta + step
            trial_ssr = ssr(trial) if abs(trial[3]) > 1e-300 else math.inf
            halvings += 1
        if trial_ssr > current:
            converged = True
            break
        beta, previous, current = trial, current, trial_ssr
        if previous - current <= rtol * max(previous, 1e-300):
            converged = True
            break
    return LogisticFit(
        beta=tuple(float(b) for b in beta),
        rmse=math.sqrt(current / q.size),
        converged=converged,
        iterations=iterations,
    )


def plcc(a, b):
    """Pearson linear correlation coefficient."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equally long 1-D samples")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float(xd @ xd) * float(yd @ yd))
    if denom == 0.0:
        raise ValueError("correlation undefined for a constant sample")
    return float(xd @ yd) / denom


def _midranks(values):
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size)
    sorted_vals = arr[order]
    i = 0
    while i < arr.size:
        j = i
        while j < arr.size and sorted_vals[j] == sorted_vals[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0
        i = j
    return ranks


def srocc(a, b):
    """Spearman rank-order correlation (midranks for ties)."""
    return plcc(_midranks(a), _midranks(b))


def rmse(a, b):
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("samples must have equal length")
    return float(np.sqrt(np.mean((x - y) ** 2)))


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    significant: bool
    method: str
    alpha: float


def fisher_z_test(r1, n1, r2, n2, alpha=0.01):
    """Two-sided comparison of two Pearson correlations.

    z = (atanh(r1) - atanh(r2)) / sqrt(1/(n1-3) + 1/(n2-3)).
    """
    for r in (r1, r2):
        if not -1.0 < r < 1.0:
            raise ValueError(f"correlation magnitude must be below 1, got {r}")
    for n in (n1, n2):
        if n < _FISHER_MIN_N:
            raise ValueError(f"need at least {_FISHER_MIN_N} samples, got {n}")
    z = (math.atanh(r1) - math.atanh(r2)) / math.sqrt(1.0 / (n1 - 3) + 1.0 / (n2 - 3))
    p = 2.0 * _normal_sf(abs(z))
    return TestResult(statistic=z, p_value=p, significant=p < alpha, method="fisher-z", alpha=alpha)


def _u_statistic(x, y):
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    r_x = float(ranks[: len(x)].sum())
    return r_x - len(x) * (len(x) + 1) / 2.0


def _exact_mw_sf_counts(two_ranks, n_x):
    """Subset-sum counts of 2*midrank totals for every subset size.

    Equivalent to enumerating all C(n, n_x) group assignments, but via
    dynamic programming with exact integer counts.
    """
    counts = [dict() for _ in range(n_x + 1)]
    counts[0][0] = 1
    for value in two_ranks:
        for k in range(min(n_x, len(two_ranks)) - 1, -1, -1):
            if not counts[k]:
                continue
            target = counts[k + 1]
            for total, ways in counts[k].items():
                target[total + value] = target.get(total + value, 0) + ways
    return counts[n_x]


def mann_whitney(x, y, alpha=0.01):
    """Two-sided Mann-Whitney U test on two independent samples.

    Ties receive midranks. When ``len(x) * len(y) <= 400`` the p-value
    comes from the exact permutation null (including ties); larger
    samples use the normal approximation with tie-corrected variance and
    continuity correction. The statistic is U of the first sample.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size == 0 or y.size == 0:
        raise ValueError("need two non-empty 1-D samples")
    n_x, n_y = x.size, y.size
    u_x = _u_statistic(x, y)
    if n_x * n_y <= _EXACT_MW_LIMIT:
        pooled = np.concatenate([x, y])
        two_ranks = [int(round(2.0 * r)) for r in _midranks(pooled)]
        counts = _exact_mw_sf_counts(two_ranks, n_x)
        offset = n_x * (n_x + 1)
        u2_obs = int(round(2.0 * u_x))
        total = sum(counts.values())
        c_le = sum(w for s, w in counts.items() if s - offset <= u2_obs)
        c_ge = sum(w for s, w in counts.items() if s - offset >= u2_obs)
        p = min(1.0, 2.0 * min(c_le, c_ge) / total)
    else:
        n = n_x + n_y
        pooled = np.concatenate([x, y])
        _, tie_counts = np.unique(pooled, return_counts=True)
        tie_term = float(((tie_counts**3 - tie_counts).sum())) / (n * (n - 1))
        var = n_x * n_y / 12.0 * ((n + 1) - tie_term)
        if var <= 0:
            p = 1.0
        else:
            mu = n_x * n_y / 2.0
            diff = u_x - mu
            correction = 0.5 if diff != 0 else 0.0
            z = (diff - math.copysign(correction, diff)) / math.sqrt(var)
            p = min(1.0, 2.0 * _normal_sf(abs(z)))
    return TestResult(
        statistic=u_x, p_value=p, significant=p < alpha, method="mann-whitney", alpha=alpha
    )


_SUBJECTIVE_HEADER = ["content", "distortion", "level", "score", "score_type"]


def ingest_subjective(path):
    """Read subjective ratings; DMOS rows are negated onto the MOS scale.

    Expected header: ``content,distortion,level,score,score_type`` with
    score_type in {mos, dmos}. Returns a dict keyed by
    (content, distortion, level).
    """
    ratings = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _SUBJECTIVE_HEADER:
            raise ValueError(f"bad subjective file header: {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(_SUBJECTIVE_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(_SUBJECTIVE_HEADER)} fields")
            content, distortion, level_s, score_s, score_type = row
            try:
                level = int(level_s)
                score = float(score_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if not math.isfinite(score):
                raise ValueError(f"{path}:{lineno}: non-finite score")
            if score_type not in ("mos", "dmos"):
                raise ValueError(f"{path}:{lineno}: bad score_type {score_type!r}")
            key = (content, distortion, level)
            if key in ratings:
                raise ValueError(f"{path}:{lineno}: duplicate rating for {key}")
            ratings[key] = score if score_type == "mos" else -score
    return ratings


@dataclass(frozen=True)
class MetricAccuracy:
    metric: str
    distortion: str
    sample_count: int
    plcc: float
    srocc: float
    rmse: float
    fit: LogisticFit
    fisher_p: float
    top_group: bool


@dataclass(frozen=True)
class WidthComparison:
    metric_a: str
    metric_b: str
    distortion: str
    u_statistic: float
    p_value: float
    significant: bool


@dataclass(frozen=True)
class BenchmarkReport:
    accuracy: list
    width_tests: list
    coverage_gaps: dict
    alpha: float


_CORR_CLIP = 1.0 - 1e-12


def benchmark(scores, subjective, widths=None, alpha=0.01):
    """Accuracy table and significance groups per (metric, distortion).

    ``scores`` is a ScoreTable (canonical lookups), ``subjective`` a
    mapping from (content, distortion, level) to canonical rating, and
    ``widths`` an optional mapping from (metric, distortion) to pooled
    normalized interval widths. Metrics whose correlation with the best
    metric of a distortion is not significantly different (Fisher z,
    two-sided) share the top group. Correlations are clipped to just
    below magnitude 1 for that comparison, since perfect fits otherwise
    leave the z statistic undefined.
    """
    metrics = sorted(scores.descriptors)
    distortions = sorted({key[1] for key in subjective})
    gaps = {}
    fitted = {}
    for distortion in distortions:
        keys = sorted(k for k in subjective if k[1] == distortion)
        for metric in metrics:
            q, s, missing = [], [], 0
            for key in keys:
                try:
                    q.append(scores.canonical(key[0], key[1], key[2], metric))
                except ValueError:
                    missing += 1
                    continue
                s.append(subjective[key])
            if missing:
                gaps[(metric, distortion)] = missing
            if len(q) < 5 or len(set(q)) < 2:
                continue
            fit = fit_logistic(q, s)
            predicted = fit(np.asarray(q))
            fitted[(metric, distortion)] = (
                len(q),
                plcc(predicted, np.asarray(s)),
                srocc(np.asarray(q), np.asarray(s)),
                rmse(predicted, np.asarray(s)),
                fit,
            )
    accuracy = []
    for distortion in distortions:
        rows = {m: fitted[(m, distortion)] for m in metrics if (m, distortion) in fitted}
        if not rows:
            continue
        best = max(rows, key=lambda m: rows[m][1])
        best_n, best_r = rows[best][0], rows[best][1]
        for metric in sorted(rows):
            n, r, rank_r, err, fit = rows[metric]
            if metric == best:
                p = 1.0
            else:
                clipped = (max(-_CORR_CLIP, min(_CORR_CLIP, r)),
                           max(-_CORR_CLIP, min(_CORR_CLIP, best_r)))
                p = fisher_z_test(clipped[0], n, clipped[1], best_n, alpha).p_value
            accuracy.append(
                MetricAccuracy(
                    metric=metric,
                    distortion=distortion,
                    sample_count=n,
                    plcc=r,
                    srocc=rank_r,
                    rmse=err,
                    fit=fit,
                    fisher_p=p,
                    top_group=p >= alpha,
                )
            )
    width_tests = []
    widths = widths or {}
    for distortion in distortions:
        have = sorted(m for m in metrics if len(widths.get((m, distortion), ())) > 0)
        for i, metric_a in enumerate(have):
            for metric_b in have[i + 1 :]:
                result = mann_whitney(
                    widths[(metric_a, distortion)], widths[(metric_b, distortion)], alpha
                )
                width_tests.append(
                    WidthComparison(
                        metric_a=metric_a,
                        metric_b=metric_b,
                        distortion=distortion,
                        u_statistic=result.statistic,
                        p_value=result.p_value,
                        significant=result.significant,
                    )
                )
    return BenchmarkReport(accuracy=accuracy, width_tests=width_tests, coverage_gaps=gaps, alpha=alpha)

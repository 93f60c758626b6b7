"""Full-reference image quality metrics and external score tables.

Every metric is exposed both natively and on a canonical scale where
larger is always better: scores of lower-is-better metrics are negated.
That convention lets downstream interval scans and accuracy statistics
treat all metrics uniformly.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._filters import correlate1d, halve

_SSIM_WINDOW_SIDE = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_DYNAMIC_RANGE = 255.0

# Scale weights of the multiscale SSIM variant, finest to coarsest.
_MS_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])
_MS_MIN_SIDE = 176

_UQI_DEGENERATE_TOL = 1e-8

_GMSD_C = 170.0

_PREWITT_SMOOTH = np.array([1.0, 1.0, 1.0]) / 3.0
_PREWITT_DIFF = np.array([1.0, 0.0, -1.0])


@dataclass(frozen=True)
class MetricDescriptor:
    """Name, polarity and (optional) native range of a quality metric."""

    name: str
    polarity: str  # "higher" or "lower" is better
    native_range: tuple = None

    def __post_init__(self):
        if self.polarity not in ("higher", "lower"):
            raise ValueError(f"polarity must be 'higher' or 'lower', got {self.polarity!r}")

    def canonical(self, score):
        """Map a native score onto the larger-is-better scale."""
        return score if self.polarity == "higher" else -score


def _gaussian_window():
    radius = _SSIM_WINDOW_SIDE // 2
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / _SSIM_SIGMA) ** 2)
    w = np.outer(g, g)
    return w / w.sum()


_WINDOW = _gaussian_window()


def _check_pair(ref, test, min_side=1):
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ValueError("expected single-channel images")
    if min(a.shape) < min_side:
        raise ValueError(f"images must be at least {min_side} pixels on each side")
    return a, b


def _local_moments(a, b):
    win = _WINDOW
    side = _SSIM_WINDOW_SIDE

    def wmean(x):
        return np.tensordot(sliding_window_view(x, (side, side)), win, axes=((2, 3), (0, 1)))

    mx = wmean(a)
    my = wmean(b)
    vx = wmean(a * a) - mx * mx
    vy = wmean(b * b) - my * my
    cov = wmean(a * b) - mx * my
    return mx, my, vx, vy, cov


def _ssim_maps(a, b):
    mx, my, vx, vy, cov = _local_moments(a, b)
    c1 = (_SSIM_K1 * _DYNAMIC_RANGE) ** 2
    c2 = (_SSIM_K2 * _DYNAMIC_RANGE) ** 2
    lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1)
    cs = (2.0 * cov + c2) / (vx + vy + c2)
    return lum * cs, cs


def psnr(ref, test):
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(_DYNAMIC_RANGE**2 / mse)


def ssim(ref, test):
    """Mean structural similarity over valid 11x11 Gaussian windows."""
    a, b = _check_pair(ref, test, min_side=_SSIM_WINDOW_SIDE)
    full, _ = _ssim_maps(a, b)
    return float(full.mean())


def _pool_scales(terms):
    """Combine per-scale similarity means into the multiscale score.

    ``terms`` holds the contrast-structure means of scales 1..4 followed
    by the full similarity mean of the coarsest scale. Negative means are
    clamped to zero before the weighted product.
    """
    terms = np.maximum(np.asarray(terms, dtype=np.float64), 0.0)
    return float(np.prod(terms**_MS_WEIGHTS))


def ms_ssim(ref, test):
    """Multiscale SSIM over five dyadic scales (2x2 mean downsampling)."""
    a, b = _check_pair(ref, test, min_side=_MS_MIN_SIDE)
    terms = []
    for scale in range(5):
        full, cs = _ssim_maps(a, b)
        terms.append(float(full.mean()) if scale == 4 else float(cs.mean()))
        if scale < 4:
            a = halve(a)
            b = halve(b)
    return _pool_scales(terms)


def uqi(ref, test):
    """Universal quality index: SSIM with both stabilizers at zero.

    Windows where either denominator factor vanishes (below 1e-8) carry
    no information and are excluded from the mean; if every window is
    degenerate the index is undefined and a ValueError is raised.
    """
    a, b = _check_pair(ref, test, min_side=_SSIM_WINDOW_SIDE)
    mx, my, vx, vy, cov = _local_moments(a, b)
    mean_term = mx * mx + my * my
    var_term = vx + vy
    valid = (mean_term > _UQI_DEGENERATE_TOL) & (var_term > _UQI_DEGENERATE_TOL)
    if not valid.any():
        raise ValueError("universal quality index undefined: all windows degenerate")
    num = (2.0 * mx * my) * (2.0 * cov)
    den = mean_term * var_term
    return float(np.mean(num[valid] / den[valid]))


def _prewitt_magnitude(a):
    gx = correlate1d(correlate1d(a, _PREWITT_SMOOTH, 0), _PREWITT_DIFF, 1)
    gy = correlate1d(correlate1d(a, _PREWITT_SMOOTH, 1), _PREWITT_DIFF, 0)
    return np.sqrt(gx * gx + gy * gy)


def gmsd(ref, test):
    """Gradient magnitude similarity deviation (lower is better).

    Both images are downsampled by 2x2 averaging, Prewitt gradient
    magnitudes are compared through a stabilized similarity, and the
    score is the population standard deviation of that similarity map.
    """
    a, b = _check_pair(ref, test, min_side=2)
    ga = _prewitt_magnitude(halve(a))
    gb = _prewitt_magnitude(halve(b))
    sim = (2.0 * ga * gb + _GMSD_C) / (ga * ga + gb * gb + _GMSD_C)
    return float(sim.std())


BUILTIN_METRICS = {
    "psnr": MetricDescriptor("psnr", "higher"),
    "ssim": MetricDescriptor("ssim", "higher", (-1.0, 1.0)),
    "ms-ssim": MetricDescriptor("ms-ssim", "higher", (0.0, 1.0)),
    "uqi": MetricDescriptor("uqi", "higher", (-1.0, 1.0)),
    "gmsd": MetricDescriptor("gmsd", "lower"),
}

_BUILTIN_FUNCTIONS = {
    "psnr": psnr,
    "ssim": ssim,
    "ms-ssim": ms_ssim,
    "uqi": uqi,
    "gmsd": gmsd,
}


@dataclass(frozen=True)
class ScoreTable:
    """Externally supplied metric scores keyed by (content, distortion, level, metric)."""

    entries: dict
    descriptors: dict

    def native(self, content, distortion, level, metric):
        key = (content, distortion, int(level), metric)
        if key not in self.entries:
            raise ValueError(f"missing external score for {key}")
        return self.entries[key]

    def canonical(self, content, distortion, level, metric):
        if metric not in self.descriptors:
            raise ValueError(f"unknown metric in score table: {metric!r}")
        return self.descriptors[metric].canonical(self.native(content, distortion, level, metric))


_SCORE_HEADER = ["content", "distortion", "level", "metric", "polarity", "score"]


def ingest_scores(path):
    """Read an external score CSV into a :class:`ScoreTable`.

    Expected header: ``content,distortion,level,metric,polarity,score``.
    Duplicate keys, non-finite scores, and per-metric polarity conflicts
    are rejected.
    """
    entries = {}
    descriptors = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _SCORE_HEADER:
            raise ValueError(f"bad score file header: {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(_SCORE_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(_SCORE_HEADER)} fields")
            content, distortion, level_s, metric, polarity, score_s = row
            try:
                level = int(level_s)
                score = float(score_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if not math.isfinite(score):
                raise ValueError(f"{path}:{lineno}: non-finite score {score_s!r}")
            if polarity not in ("higher", "lower"):
                raise ValueError(f"{path}:{lineno}: bad polarity {polarity!r}")
            if metric in descriptors and descriptors[metric].polarity != polarity:
                raise ValueError(f"{path}:{lineno}: polarity conflict for metric {metric!r}")
            descriptors.setdefault(metric, MetricDescriptor(metric, polarity))
            key = (content, distortion, level, metric)
            if key in entries:
                raise ValueError(f"{path}:{lineno}: duplicate score for {key}")
            entries[key] = score
    return ScoreTable(entries=entries, descriptors=descriptors)


def measure_quality(metric, ref, test, table=None, key=None):
    """Score a (reference, test) pair on the canonical scale.

    Built-in metrics are computed from the pixel data. Other names are
    looked up in ``table`` (a :class:`ScoreTable`) under
    ``key = (content, distortion, level)``.
    """
    if metric in _BUILTIN_FUNCTIONS:
        grays = []
        for img in (ref, test):
            if img.channels != 1:
                raise ValueError(f"{metric} expects grayscale input")
            grays.append(img.data)
        score = _BUILTIN_FUNCTIONS[metric](*grays)
        return BUILTIN_METRICS[metric].canonical(score)
    if table is not None and key is not None:
        return table.canonical(key[0], key[1], key[2], metric)
    raise ValueError(f"unknown metric: {metric!r}")

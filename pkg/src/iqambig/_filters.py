"""Separable filtering primitives shared across the package.

Everything here operates on float64 arrays with mirror-reflected
boundaries (numpy ``reflect`` mode: the edge sample is the mirror axis
and is not repeated). Accumulation runs tap by tap in a fixed order, so
results are bit-stable for a given numpy build.
"""

import math

import numpy as np

# 5-tap binomial lowpass, the classic pyramid generating kernel. The
# taps are exact binary fractions, so filtering a constant field returns
# the constant without rounding error.
BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def correlate1d(img, kernel, axis):
    """Correlate ``img`` with an odd-length 1-D kernel along one axis."""
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 1 or k.size % 2 != 1:
        raise ValueError("kernel must be 1-D with odd length")
    radius = k.size // 2
    arr = np.asarray(img, dtype=np.float64)
    if radius == 0:
        return arr * k[0]
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    buf = np.pad(arr, pad, mode="reflect")
    out = np.zeros(arr.shape, dtype=np.float64)
    index = [slice(None)] * arr.ndim
    for tap in range(k.size):
        index[axis] = slice(tap, tap + arr.shape[axis])
        out += k[tap] * buf[tuple(index)]
    return out


def separable_filter(img, kernel):
    """Apply the same 1-D kernel along both image axes."""
    return correlate1d(correlate1d(img, kernel, 0), kernel, 1)


def binomial_blur(img):
    return separable_filter(img, BINOMIAL5)


def gaussian_kernel(sigma):
    """Normalized Gaussian taps with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img, sigma):
    return separable_filter(img, gaussian_kernel(sigma))


def halve(img):
    """Downsample by taking the mean of non-overlapping 2x2 blocks.

    Trailing rows or columns that do not fill a block are dropped.
    """
    arr = np.asarray(img, dtype=np.float64)
    h2, w2 = arr.shape[0] // 2, arr.shape[1] // 2
    if h2 == 0 or w2 == 0:
        raise ValueError("image too small to downsample")
    return arr[: h2 * 2, : w2 * 2].reshape(h2, 2, w2, 2).mean(axis=(1, 3))

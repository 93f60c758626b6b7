"""Independent metric reimplementations used as oracles by the tests.

Deliberately built from different primitives than the package: moments
come from explicit per-tap shifted accumulation instead of stride-trick
windows, padding is done by hand, and every pooling step is spelled out.
"""

import math

import numpy as np

_SIDE = 11
_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03
_RANGE = 255.0
_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
_GMSD_C = 170.0


def _window():
    r = _SIDE // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / _SIGMA) ** 2)
    w = np.outer(g, g)
    return w / w.sum()


def _tap_moments(a, b):
    win = _window()
    oh = a.shape[0] - _SIDE + 1
    ow = a.shape[1] - _SIDE + 1
    mx = np.zeros((oh, ow))
    my = np.zeros((oh, ow))
    sxx = np.zeros((oh, ow))
    syy = np.zeros((oh, ow))
    sxy = np.zeros((oh, ow))
    for dy in range(_SIDE):
        for dx in range(_SIDE):
            w = win[dy, dx]
            pa = a[dy : dy + oh, dx : dx + ow]
            pb = b[dy : dy + oh, dx : dx + ow]
            mx += w * pa
            my += w * pb
            sxx += w * pa * pa
            syy += w * pb * pb
            sxy += w * pa * pb
    return mx, my, sxx - mx * mx, syy - my * my, sxy - mx * my


def psnr_oracle(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    err = 0.0
    for x, y in zip(a.ravel(), b.ravel()):
        err += (x - y) ** 2
    mse = err / a.size
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(_RANGE * _RANGE / mse)


def ssim_oracle(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mx, my, vx, vy, cov = _tap_moments(a, b)
    c1 = (_K1 * _RANGE) ** 2
    c2 = (_K2 * _RANGE) ** 2
    lum = (2 * mx * my + c1) / (mx * mx + my * my + c1)
    cs = (2 * cov + c2) / (vx + vy + c2)
    return float((lum * cs).mean())


def _cs_mean(a, b):
    mx, my, vx, vy, cov = _tap_moments(a, b)
    c2 = (_K2 * _RANGE) ** 2
    return float(((2 * cov + c2) / (vx + vy + c2)).mean())


def _halve_loops(a):
    h2, w2 = a.shape[0] // 2, a.shape[1] // 2
    out = np.zeros((h2, w2))
    for i in range(h2):
        for j in range(w2):
            out[i, j] = a[2 * i : 2 * i + 2, 2 * j : 2 * j + 2].mean()
    return out


def ms_ssim_oracle(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    terms = []
    for scale in range(5):
        terms.append(ssim_oracle(a, b) if scale == 4 else _cs_mean(a, b))
        if scale < 4:
            a = _halve_loops(a)
            b = _halve_loops(b)
    prod = 1.0
    for t, w in zip(terms, _WEIGHTS):
        prod *= max(t, 0.0) ** w
    return prod


def uqi_oracle(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mx, my, vx, vy, cov = _tap_moments(a, b)
    vals = []
    for i in range(mx.shape[0]):
        for j in range(mx.shape[1]):
            mean_term = mx[i, j] ** 2 + my[i, j] ** 2
            var_term = vx[i, j] + vy[i, j]
            if mean_term > 1e-8 and var_term > 1e-8:
                vals.append(
                    (2 * mx[i, j] * my[i, j]) * (2 * cov[i, j]) / (mean_term * var_term)
                )
    if not vals:
        raise ValueError("all windows degenerate")
    return float(np.mean(vals))


def _pad_reflect(a, r):
    h, w = a.shape
    out = np.zeros((h + 2 * r, w + 2 * r))
    for i in range(-r, h + r):
        for j in range(-r, w + r):
            si = abs(i) if i < h else 2 * h - 2 - i
            sj = abs(j) if j < w else 2 * w - 2 - j
            out[i + r, j + r] = a[si, sj]
    return out


def _correlate2d(a, kernel):
    r = kernel.shape[0] // 2
    pad = _pad_reflect(a, r)
    out = np.zeros_like(a)
    for dy in range(kernel.shape[0]):
        for dx in range(kernel.shape[1]):
            out += kernel[dy, dx] * pad[dy : dy + a.shape[0], dx : dx + a.shape[1]]
    return out


def gmsd_oracle(a, b):
    a = _halve_loops(np.asarray(a, dtype=np.float64))
    b = _halve_loops(np.asarray(b, dtype=np.float64))
    smooth = np.array([1.0, 1.0, 1.0]) / 3.0
    diff = np.array([1.0, 0.0, -1.0])
    kx = np.outer(smooth, diff)
    ky = np.outer(diff, smooth)
    ga = np.sqrt(_correlate2d(a, kx) ** 2 + _correlate2d(a, ky) ** 2)
    gb = np.sqrt(_correlate2d(b, kx) ** 2 + _correlate2d(b, ky) ** 2)
    sim = (2 * ga * gb + _GMSD_C) / (ga * ga + gb * gb + _GMSD_C)
    return float(np.sqrt(np.mean((sim - sim.mean()) ** 2)))


ORACLES = {
    "psnr": psnr_oracle,
    "ssim": ssim_oracle,
    "ms-ssim": ms_ssim_oracle,
    "uqi": uqi_oracle,
    "gmsd": gmsd_oracle,
}

import math

import numpy as np
import pytest

from iqambig._filters import (
    BINOMIAL5,
    binomial_blur,
    correlate1d,
    gaussian_blur,
    gaussian_kernel,
    halve,
    separable_filter,
)


def reflect_index(i, n):
    # numpy "reflect": the edge sample is the mirror axis, not repeated
    period = 2 * n - 2 if n > 1 else 1
    i = abs(i) % period
    return period - i if i >= n else i


def brute_correlate(img, kernel, axis):
    img = np.asarray(img, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    radius = k.size // 2
    out = np.zeros_like(img)
    it = np.ndindex(img.shape)
    for idx in it:
        acc = 0.0
        for tap in range(k.size):
            j = list(idx)
            j[axis] = reflect_index(idx[axis] + tap - radius, img.shape[axis])
            acc += k[tap] * img[tuple(j)]
        out[idx] = acc
    return out


def test_binomial_taps_sum_to_one():
    assert BINOMIAL5.sum() == 1.0
    assert np.array_equal(BINOMIAL5 * 16, [1, 4, 6, 4, 1])


def test_correlate_matches_brute_force():
    rng = np.random.default_rng(11)
    img = rng.uniform(0, 255, size=(9, 7))
    for kernel in (BINOMIAL5, np.array([0.25, 0.5, 0.25]), np.array([1.0])):
        for axis in (0, 1):
            got = correlate1d(img, kernel, axis)
            want = brute_correlate(img, kernel, axis)
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_correlate_rejects_even_kernels():
    with pytest.raises(ValueError):
        correlate1d(np.zeros((4, 4)), np.array([0.5, 0.5]), 0)


def test_separable_is_both_axes():
    rng = np.random.default_rng(3)
    img = rng.uniform(0, 1, size=(8, 8))
    got = separable_filter(img, BINOMIAL5)
    want = brute_correlate(brute_correlate(img, BINOMIAL5, 0), BINOMIAL5, 1)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_constant_field_is_fixed_point():
    img = np.full((16, 16), 77.0)
    assert np.array_equal(binomial_blur(img), img)
    assert np.array_equal(gaussian_blur(img, 2.0), img)


def test_gaussian_kernel_shape_and_values():
    k = gaussian_kernel(0.45)
    assert k.size == 2 * math.ceil(3 * 0.45) + 1 == 5
    x = np.arange(-2, 3)
    raw = np.exp(-0.5 * (x / 0.45) ** 2)
    np.testing.assert_allclose(k, raw / raw.sum(), atol=1e-15)
    assert abs(k.sum() - 1.0) < 1e-15


def test_gaussian_kernel_rejects_nonpositive_sigma():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            gaussian_kernel(bad)


def test_halve_block_means():
    img = np.array(
        [
            [1.0, 3.0, 5.0, 7.0],
            [9.0, 11.0, 13.0, 15.0],
            [2.0, 4.0, 6.0, 8.0],
            [10.0, 12.0, 14.0, 16.0],
        ]
    )
    want = np.array([[6.0, 10.0], [7.0, 11.0]])
    np.testing.assert_array_equal(halve(img), want)


def test_halve_drops_trailing_odd_samples():
    img = np.arange(15, dtype=np.float64).reshape(3, 5)
    got = halve(img)
    assert got.shape == (1, 2)
    np.testing.assert_array_equal(got, halve(img[:2, :4]))


def test_halve_rejects_tiny_input():
    with pytest.raises(ValueError):
        halve(np.zeros((1, 5)))

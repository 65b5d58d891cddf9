"""Synthetic test images."""

import numpy as np

from tgvkl.operators import grad
from tgvkl.testimages import phantom, phantom_small, ramp


def test_phantom_range_and_shape():
    img = phantom(225)
    assert img.shape == (225, 225)
    assert img.min() >= 0.0 and img.max() <= 1.0
    assert img.max() > 0.5  # genuinely bright content


def test_phantom_deterministic():
    np.testing.assert_array_equal(phantom(64), phantom(64))


def test_phantom_is_smooth_dominated_with_edges():
    img = phantom(225)
    mags = np.sqrt(np.sum(grad(img) ** 2, axis=0))
    # mostly gentle slopes, but some genuine jumps
    assert np.median(mags) < 0.02
    assert mags.max() > 0.1


def test_phantom_small_is_block_average():
    small = phantom_small(16, oversample=4)
    fine = phantom(64)
    expected = fine.reshape(16, 4, 16, 4).mean(axis=(1, 3))
    np.testing.assert_array_equal(small, expected)
    assert small.min() >= 0.0 and small.max() <= 1.0


def test_ramp_monotone():
    r = ramp(16)
    assert r.shape == (16, 16)
    assert np.all(np.diff(r, axis=1) >= 0)
    assert r[0, 0] == 0.0 and r[0, -1] == 1.0

"""Synthetic grayscale test images.

The primary test image is an ellipse phantom that is predominantly smooth
(quadratic shading inside each ellipse) with a few sharp boundaries, on a
dim background. This is the kind of content second-order regularization is
designed for: smooth ramps that first-order total variation would staircase,
separated by genuine edges.
"""

from __future__ import annotations

import numpy as np

# (base, amp, power, a, b, x0, y0, phi_degrees)
# value contribution inside the ellipse: base + amp * (1 - r^2)^power with
# r the normalized elliptic radius; base != 0 creates a jump (an edge) at the
# boundary, base = 0 with power >= 1 blends in smoothly.
_ELLIPSES = [
    # full-frame smooth dome: no flat region anywhere in the image
    (0.22, 0.35, 1.0, 1.45, 1.45, 0.00, 0.00, 0.0),
    # large steep smooth lobes
    (0.00, 0.40, 2.0, 0.38, 0.45, -0.35, 0.30, 10.0),
    (0.00, -0.32, 2.0, 0.32, 0.38, 0.40, -0.25, -20.0),
    (0.00, 0.34, 2.0, 0.30, 0.26, 0.30, 0.42, 0.0),
    (0.00, -0.25, 2.0, 0.30, 0.34, -0.32, -0.42, 15.0),
    (0.00, 0.36, 2.0, 0.34, 0.30, 0.02, -0.05, 0.0),
    # edged features
    (0.12, 0.10, 1.0, 0.16, 0.22, -0.05, 0.55, 20.0),
    (0.14, 0.00, 0.0, 0.10, 0.10, 0.55, 0.05, 0.0),
    (-0.10, 0.00, 0.0, 0.09, 0.12, -0.55, -0.15, 0.0),
]

_BACKGROUND = 0.0


# medium-scale smooth undulations: (amplitude, cycles_x, cycles_y)
_RIPPLES = [
    (0.190, 2.5, 2.7),
    (0.150, -3.4, 2.0),
]

# localized fine texture: (amplitude, cycles_x, cycles_y, a, b, x0, y0)
# high-frequency sinusoid inside an elliptic window with a smooth taper
_TEXTURE_PATCHES = [
    (0.028, 20.0, 14.0, 0.36, 0.29, -0.35, 0.30),
    (0.028, -16.0, 22.0, 0.36, 0.30, 0.32, -0.30),
    (0.028, 18.0, -16.0, 0.32, 0.28, 0.05, 0.55),
    (0.028, -22.0, 12.0, 0.32, 0.26, -0.15, -0.45),
]

# flat plateaus: (level, a, b, x0, y0) — image clipped from above inside
_PLATEAUS = [
    (0.24, 0.22, 0.18, -0.72, 0.72),
    (0.72, 0.12, 0.10, 0.30, 0.42),
]


def phantom(size: int = 225) -> np.ndarray:
    """Smooth ellipse phantom with edges and fine texture; values in [0, 1]."""
    coords = np.linspace(-1.0, 1.0, size)
    x, y = np.meshgrid(coords, -coords)  # image row 0 at the top
    img = np.full((size, size), _BACKGROUND)
    for base, amp, power, a, bb, x0, y0, phi in _ELLIPSES:
        rad = np.deg2rad(phi)
        xr = (x - x0) * np.cos(rad) + (y - y0) * np.sin(rad)
        yr = -(x - x0) * np.sin(rad) + (y - y0) * np.cos(rad)
        r2 = (xr / a) ** 2 + (yr / bb) ** 2
        inside = r2 <= 1.0
        img[inside] += base + amp * (1.0 - r2[inside]) ** power if power > 0 \
            else base
    base0, amp0, power0, a0, b0 = _ELLIPSES[0][:5]
    r2main = (x / a0) ** 2 + (y / b0) ** 2
    window = np.maximum(1.0 - r2main, 0.0)
    for amp, cx, cy in _RIPPLES:
        img += amp * window * np.sin(np.pi * (cx * x + cy * y))
    for amp, cx, cy, a, bb, x0, y0 in _TEXTURE_PATCHES:
        r2 = ((x - x0) / a) ** 2 + ((y - y0) / bb) ** 2
        taper = np.maximum(1.0 - r2, 0.0)
        img += amp * taper * np.sin(np.pi * (cx * x + cy * y))
    for level, a, bb, x0, y0 in _PLATEAUS:
        inside = ((x - x0) / a) ** 2 + ((y - y0) / bb) ** 2 <= 1.0
        img[inside] = np.minimum(img[inside], level)
    return np.clip(img, 0.0, 1.0)


def phantom_small(size: int = 64, oversample: int = 4) -> np.ndarray:
    """Downsampled phantom: rendered at ``size * oversample`` and block-averaged."""
    fine = phantom(size * oversample)
    return fine.reshape(size, oversample, size, oversample).mean(axis=(1, 3))


def ramp(size: int = 32) -> np.ndarray:
    """Monotone horizontal ramp in [0, 1]."""
    row = np.linspace(0.0, 1.0, size)
    return np.tile(row, (size, 1))

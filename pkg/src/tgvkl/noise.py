"""Poisson degradation of clean images: blur, background, photon noise.

The Poisson sampler is built on a seeded PCG64 uniform stream (128-bit
state) so that a given (clean image, config) pair always produces the same
degraded image, on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tgvkl.operators import BccbOperator, gaussian_psf


@dataclass(frozen=True)
class DegradeConfig:
    """Degradation protocol: photon scale, background, blur, seed."""

    kappa: float = 50.0
    gamma: float = 2e-3
    band: int = 5
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be strictly positive")


class Rng:
    """Deterministic uniform source used by the Poisson sampler."""

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform(self) -> float:
        return self._gen.random()


def poisson_sample(mean: float, rng: Rng) -> int:
    """One draw from a Poisson distribution with the given mean.

    Sequential-search inversion for mean < 30, Hormann's transformed
    rejection (PTRS) above; the switch point trades speed only, both methods
    are exact.
    """
    if not math.isfinite(mean) or mean < 0:
        raise ValueError(f"Poisson mean must be finite and non-negative, got {mean}")
    if mean == 0:
        return 0
    if mean < 30.0:
        return _poisson_inversion(mean, rng)
    return _poisson_ptrs(mean, rng)


def _poisson_inversion(mean: float, rng: Rng) -> int:
    p = math.exp(-mean)
    cdf = p
    k = 0
    u = rng.uniform()
    while u > cdf:
        k += 1
        p *= mean / k
        cdf += p
        if p < 1e-300 and k > mean:  # guards against u in the far tail
            break
    return k


def _poisson_ptrs(mean: float, rng: Rng) -> int:
    # Hormann (1993), "The transformed rejection method for generating
    # Poisson random variables", algorithm PTRS.
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = rng.uniform() - 0.5
        v = rng.uniform()
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + mean + 0.43))
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= k * loglam - mean - math.lgamma(k + 1.0)):
            return k


def degrade(clean: np.ndarray, cfg: DegradeConfig) -> tuple[np.ndarray, np.ndarray]:
    """Blur, scale and Poisson-corrupt a clean image with values in [0, 1].

    Returns (b, y): the integer photon counts b and their means
    y = A(kappa * clean) + gamma.
    """
    clean = np.asarray(clean, dtype=np.float64)
    if clean.min() < 0 or clean.max() > 1:
        raise ValueError("clean image must have values in [0, 1]")
    blur = BccbOperator.from_psf(gaussian_psf(cfg.band, cfg.sigma), clean.shape)
    y = blur.apply(cfg.kappa * clean) + cfg.gamma
    # blur of a non-negative image can go epsilon-negative through the FFT
    y = np.maximum(y, cfg.gamma * 1e-12)
    rng = Rng(cfg.seed)
    flat = y.reshape(-1)
    b = np.array([poisson_sample(m, rng) for m in flat], dtype=np.float64)
    return b.reshape(clean.shape), y

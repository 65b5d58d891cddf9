"""Closed-form proximal updates and the discrepancy-equation root finder.

The KL proximal map is evaluated through the shifted variable m = z + gamma,
which satisfies m^2 + (tau - gamma - q) m - tau b = 0 and is strictly
positive whenever tau > 0 and b > 0. Taking the cancellation-free branch of
the quadratic root keeps m accurate even when q is large and negative, where
the naive formula for z rounds m to zero or below. The root of the
discrepancy equation sum F(z_i(tau) + gamma_i; b_i) = n/2 is found by
Newton-Raphson safeguarded by a maintained bracket with bisection fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class TauSolveError(Exception):
    """Discrepancy-equation solver failed to converge."""


class TauStatus(Enum):
    CONVERGED = "converged"
    ALREADY_BELOW = "already_below"  # data fit better than noise level at tau_min
    NO_ROOT = "no_root"              # discrepancy stays above n/2 up to tau_max


@dataclass
class TauSolveOptions:
    tol_abs: float | None = None  # defaults to 1e-6 * n
    max_newton: int = 50
    max_bisect: int = 60
    tau_min: float = 1e-12
    tau_max: float = 1e12
    tau_init: float = 1.0

    def __post_init__(self):
        if self.tau_min <= 0 or self.tau_max <= self.tau_min:
            raise ValueError("need 0 < tau_min < tau_max")
        if self.tol_abs is not None and self.tol_abs <= 0:
            raise ValueError("tol_abs must be positive")


def _prox_mean(q: np.ndarray, b: np.ndarray, gamma, tau: float) -> np.ndarray:
    """Stable positive root m = z + gamma of m^2 + (tau-gamma-q) m - tau b = 0."""
    q = np.asarray(q, dtype=np.float64)
    s = tau - gamma - q
    root = np.sqrt(s * s + 4.0 * tau * b)
    # branch without subtractive cancellation: for s >= 0 use m = 2 tau b / (s + root)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(s + root > 0.0, 2.0 * tau * b / (s + root), 0.0)
    return np.where(s >= 0.0, small, 0.5 * (-s + root))


def z1_update(q: np.ndarray, b: np.ndarray, gamma, tau: float) -> np.ndarray:
    """KL proximal map: minimizer of tau*[(z+g) - b ln(z+g)] + (z-q)^2/2."""
    if tau < 0 or not np.isfinite(tau):
        raise ValueError("tau must be finite and non-negative")
    q = np.asarray(q, dtype=np.float64)
    if tau == 0.0:
        return q.copy()
    return _prox_mean(q, b, gamma, tau) - gamma


def z4_update(q: np.ndarray) -> np.ndarray:
    """Projection onto the non-negative orthant."""
    return np.maximum(q, 0.0)


def shrink_groups(q: np.ndarray, threshold: float) -> np.ndarray:
    """Per-pixel group soft-shrinkage of a (k, n1, n2) field by ``threshold``.

    Each length-k pixel vector is scaled by max(1 - threshold/||.||, 0);
    zero vectors map to zero.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    norms = np.sqrt(np.sum(q * q, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > 0, np.maximum(1.0 - threshold / norms, 0.0), 0.0)
    return q * scale


def _kl_sum(z: np.ndarray, b: np.ndarray, gamma) -> float:
    zg = z + gamma
    pos = b > 0
    out = np.sum(zg) - np.sum(b)
    if np.any(pos):
        bp = b[pos]
        zgp = zg[pos]
        if np.any(zgp <= 0):
            raise FloatingPointError(
                "z + gamma <= 0 at a pixel with positive count; "
                "inconsistent proximal state")
        out += np.sum(bp * np.log(bp) - bp * np.log(zgp))
    return float(out)


def discrepancy_of_tau(q: np.ndarray, b: np.ndarray, gamma, tau: float) -> float:
    """KL discrepancy of the proximal point z(tau): sum_i F(z_i + gamma_i; b_i)."""
    if tau == 0.0:
        return _kl_sum(np.asarray(q, dtype=np.float64), b, gamma)
    m = _prox_mean(q, b, gamma, tau)  # m = z(tau) + gamma
    pos = b > 0
    out = np.sum(m) - np.sum(b)
    if np.any(pos):
        bp = b[pos]
        mp = np.maximum(m[pos], 1e-300)
        out += np.sum(bp * np.log(bp) - bp * np.log(mp))
    return float(out)


def discrepancy_derivative(q: np.ndarray, b: np.ndarray, gamma, tau: float) -> float:
    """Analytic d/dtau of :func:`discrepancy_of_tau`; non-positive everywhere."""
    if tau <= 0:
        raise ValueError("derivative defined for tau > 0")
    q = np.asarray(q, dtype=np.float64)
    s = tau - gamma - q
    root = np.sqrt(np.maximum(s * s + 4.0 * tau * b, 1e-300))
    mprime = 0.5 * (-1.0 + (s + 2.0 * b) / root)
    m = _prox_mean(q, b, gamma, tau)
    ratio = np.where(b > 0, b / np.maximum(m, 1e-300), 0.0)
    return float(np.sum(mprime * (1.0 - ratio)))


def solve_tau(q: np.ndarray, b: np.ndarray, gamma,
              opts: TauSolveOptions | None = None) -> tuple[float, TauStatus]:
    """Solve sum F(z_i(tau) + gamma_i; b_i) = n/2 for tau.

    Returns (tau_min, ALREADY_BELOW) when even vanishing regularization of
    the proximal point over-fits the noise level, and (tau_max, NO_ROOT)
    when the discrepancy never reaches n/2. Otherwise Newton iterates,
    bracket-safeguarded, until |D(tau) - n/2| <= tol_abs.
    """
    opts = opts or TauSolveOptions()
    q = np.asarray(q, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = q.size
    target = 0.5 * n
    tol = opts.tol_abs if opts.tol_abs is not None else 1e-6 * n

    def g(tau):
        return discrepancy_of_tau(q, b, gamma, tau) - target

    g_min = g(opts.tau_min)
    if g_min < 0:
        return opts.tau_min, TauStatus.ALREADY_BELOW
    if abs(g_min) <= tol:
        return opts.tau_min, TauStatus.CONVERGED

    # bracket [lo, hi] with g(lo) > 0 > g(hi), grown/shrunk from tau_init
    lo, hi = opts.tau_min, None
    t = min(max(opts.tau_init, opts.tau_min * 2), opts.tau_max)
    gt = g(t)
    while True:
        if abs(gt) <= tol:
            return t, TauStatus.CONVERGED
        if gt > 0:
            lo = t
            t *= 2.0
            if t > opts.tau_max:
                if g(opts.tau_max) > tol:
                    return opts.tau_max, TauStatus.NO_ROOT
                t = opts.tau_max
            gt = g(t)
        else:
            hi = t
            break

    t = 0.5 * (lo + hi)
    bisections = 0
    for _ in range(opts.max_newton + opts.max_bisect):
        gt = g(t)
        if abs(gt) <= tol:
            return t, TauStatus.CONVERGED
        if gt > 0:
            lo = t
        else:
            hi = t
        dgt = discrepancy_derivative(q, b, gamma, t)
        newton = t - gt / dgt if dgt < 0 else None
        if newton is not None and lo < newton < hi:
            t = newton
        else:
            t = 0.5 * (lo + hi)
            bisections += 1
            if bisections > opts.max_bisect:
                break
    raise TauSolveError(
        f"no convergence within budget; bracket [{lo}, {hi}], residual {gt}")

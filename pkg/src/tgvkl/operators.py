"""Periodic convolution and finite-difference operators, plus their spectra.

All operators assume periodic boundary conditions, under which blur and
difference matrices are block circulant with circulant blocks and therefore
diagonalized by the 2-D FFT. Gradients use forward differences with wrap;
adjoints are derived algebraically from that stencil, never rediscretized.

Vector fields over an (n1, n2) grid are plain arrays of shape (2, n1, n2)
(gradient-like) or (4, n1, n2) (symmetrized-gradient-like).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def gaussian_psf(band: int, sigma: float) -> np.ndarray:
    """band x band samples of a zero-mean isotropic Gaussian, normalized to sum 1.

    ``band`` is the odd side length of the square support, ``sigma`` the
    standard deviation in pixels.
    """
    if band % 2 == 0 or band <= 0:
        raise ValueError("band must be a positive odd integer")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = band // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


@dataclass(frozen=True)
class BccbOperator:
    """Periodic convolution operator stored as PSF plus precomputed spectrum.

    The spectrum is the 2-D FFT of the PSF zero-padded to the grid size and
    circularly shifted so its center sits at index (0, 0).
    """

    psf: np.ndarray
    spectrum: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.spectrum.shape

    @classmethod
    def from_psf(cls, psf: np.ndarray, shape: tuple[int, int]) -> "BccbOperator":
        psf = np.asarray(psf, dtype=np.float64)
        if psf.ndim != 2 or psf.shape[0] % 2 == 0 or psf.shape[1] % 2 == 0:
            raise ValueError("psf must be 2-D with odd side lengths")
        n1, n2 = shape
        if psf.shape[0] > n1 or psf.shape[1] > n2:
            raise ValueError("psf larger than the target grid")
        padded = np.zeros(shape)
        padded[: psf.shape[0], : psf.shape[1]] = psf
        padded = np.roll(padded, (-(psf.shape[0] // 2), -(psf.shape[1] // 2)),
                         axis=(0, 1))
        return cls(psf, np.fft.fft2(padded))

    @classmethod
    def from_kernel_image(cls, kernel: np.ndarray) -> "BccbOperator":
        """Operator from a full-grid impulse response with center at (0, 0)."""
        kernel = np.asarray(kernel, dtype=np.float64)
        return cls(kernel, np.fft.fft2(kernel))

    def apply(self, img: np.ndarray) -> np.ndarray:
        if img.shape != self.shape:
            raise ValueError(f"shape mismatch: {img.shape} vs {self.shape}")
        return np.real(np.fft.ifft2(self.spectrum * np.fft.fft2(img)))

    def apply_adjoint(self, img: np.ndarray) -> np.ndarray:
        if img.shape != self.shape:
            raise ValueError(f"shape mismatch: {img.shape} vs {self.shape}")
        return np.real(np.fft.ifft2(np.conj(self.spectrum) * np.fft.fft2(img)))


def difference_operators(shape: tuple[int, int]) -> tuple[BccbOperator, BccbOperator]:
    """Forward-difference operators (horizontal, vertical) as BCCB operators."""
    n1, n2 = shape
    kh = np.zeros(shape)
    kh[0, 0] = -1.0
    kh[0, (n2 - 1) % n2] = kh[0, (n2 - 1) % n2] + 1.0
    kv = np.zeros(shape)
    kv[0, 0] += -1.0
    kv[(n1 - 1) % n1, 0] += 1.0
    return BccbOperator.from_kernel_image(kh), BccbOperator.from_kernel_image(kv)


def grad(u: np.ndarray) -> np.ndarray:
    """Forward-difference gradient with periodic wrap, shape (2, n1, n2).

    Plane 0 is the horizontal difference u(i, j+1) - u(i, j), plane 1 the
    vertical one.
    """
    return np.stack([np.roll(u, -1, axis=1) - u, np.roll(u, -1, axis=0) - u])


def grad_adjoint(p: np.ndarray) -> np.ndarray:
    """Exact adjoint of :func:`grad` (negative periodic divergence)."""
    return (np.roll(p[0], 1, axis=1) - p[0]) + (np.roll(p[1], 1, axis=0) - p[1])


def sym_grad(w: np.ndarray) -> np.ndarray:
    """Symmetrized gradient of a 2-plane field, shape (4, n1, n2).

    Planes: (Dh w1, (Dv w1 + Dh w2)/2, (Dv w1 + Dh w2)/2, Dv w2). Planes 1
    and 2 are identical by construction.
    """
    dh_w1 = np.roll(w[0], -1, axis=1) - w[0]
    dv_w1 = np.roll(w[0], -1, axis=0) - w[0]
    dh_w2 = np.roll(w[1], -1, axis=1) - w[1]
    dv_w2 = np.roll(w[1], -1, axis=0) - w[1]
    mixed = 0.5 * (dv_w1 + dh_w2)
    return np.stack([dh_w1, mixed, mixed, dv_w2])


def sym_grad_adjoint(s: np.ndarray) -> np.ndarray:
    """Exact adjoint (transpose) of :func:`sym_grad`, shape (2, n1, n2)."""

    def dh_t(x):
        return np.roll(x, 1, axis=1) - x

    def dv_t(x):
        return np.roll(x, 1, axis=0) - x

    half = 0.5 * (s[1] + s[2])
    return np.stack([dh_t(s[0]) + dv_t(half), dh_t(half) + dv_t(s[3])])


@dataclass(frozen=True)
class FourierSystem:
    """Per-frequency 3x3 Hermitian systems for the joint (u, w1, w2) update.

    Entries are the frequency-domain blocks of the normal-equations matrix of
    the stacked operator [A, 0; D, -I; 0, E; I, 0], with the symmetrized
    gradient E expanded (its repeated middle row counted twice). Solved in
    closed form via the cofactor inverse; no factorization needed since every
    matrix is Hermitian positive definite.
    """

    m11: np.ndarray
    m12: np.ndarray
    m13: np.ndarray
    m22: np.ndarray
    m23: np.ndarray
    m33: np.ndarray
    det: np.ndarray = field(init=False)

    def __post_init__(self):
        # det of [[m11,m12,m13],[conj(m12),m22,m23],[conj(m13),conj(m23),m33]]
        det = (self.m11 * (self.m22 * self.m33 - self.m23 * np.conj(self.m23))
               - self.m12 * (np.conj(self.m12) * self.m33
                             - self.m23 * np.conj(self.m13))
               + self.m13 * (np.conj(self.m12) * np.conj(self.m23)
                             - self.m22 * np.conj(self.m13)))
        object.__setattr__(self, "det", det)

    def solve(self, r1: np.ndarray, r2: np.ndarray, r3: np.ndarray):
        """Solve M(f) x(f) = r(f) at every frequency (Cramer's rule)."""
        m11, m12, m13 = self.m11, self.m12, self.m13
        m22, m23, m33 = self.m22, self.m23, self.m33
        c11 = m22 * m33 - m23 * np.conj(m23)
        c12 = m13 * np.conj(m23) - m12 * m33
        c13 = m12 * m23 - m13 * m22
        c22 = m11 * m33 - m13 * np.conj(m13)
        c23 = m13 * np.conj(m12) - m11 * m23
        c33 = m11 * m22 - m12 * np.conj(m12)
        x1 = (c11 * r1 + c12 * r2 + c13 * r3) / self.det
        x2 = (np.conj(c12) * r1 + c22 * r2 + c23 * r3) / self.det
        x3 = (np.conj(c13) * r1 + np.conj(c23) * r2 + c33 * r3) / self.det
        return x1, x2, x3


def assemble_fourier_system(a: np.ndarray, dh: np.ndarray,
                            dv: np.ndarray) -> FourierSystem:
    """Assemble the per-frequency normal-equations blocks from three spectra."""
    if not (a.shape == dh.shape == dv.shape):
        raise ValueError("spectra must share dimensions")
    abs_a2 = np.abs(a) ** 2
    abs_h2 = np.abs(dh) ** 2
    abs_v2 = np.abs(dv) ** 2
    return FourierSystem(
        m11=(abs_a2 + abs_h2 + abs_v2 + 1.0).astype(complex),
        m12=-np.conj(dh),
        m13=-np.conj(dv),
        m22=(1.0 + abs_h2 + 0.5 * abs_v2).astype(complex),
        m23=0.5 * np.conj(dv) * dh,
        m33=(1.0 + abs_v2 + 0.5 * abs_h2).astype(complex),
    )

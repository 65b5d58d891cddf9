"""Shared oracles for the test suite: dense operator matrices and direct
(non-FFT) periodic convolution, used to validate the fast implementations."""

from __future__ import annotations

import numpy as np

from tgvkl.operators import BccbOperator, grad, grad_adjoint, sym_grad, sym_grad_adjoint


def direct_periodic_convolution(psf: np.ndarray, img: np.ndarray) -> np.ndarray:
    """Nested-loop periodic convolution with the PSF centered on each pixel."""
    n1, n2 = img.shape
    k1, k2 = psf.shape
    h1, h2 = k1 // 2, k2 // 2
    out = np.zeros_like(img, dtype=np.float64)
    for i in range(n1):
        for j in range(n2):
            acc = 0.0
            for a in range(k1):
                for b in range(k2):
                    acc += psf[a, b] * img[(i - a + h1) % n1, (j - b + h2) % n2]
            out[i, j] = acc
    return out


def dense_matrix_from_linear_map(apply_fn, in_shape, out_shape) -> np.ndarray:
    """Materialize a linear map as a dense matrix by probing basis vectors."""
    n_in = int(np.prod(in_shape))
    n_out = int(np.prod(out_shape))
    mat = np.zeros((n_out, n_in))
    basis = np.zeros(in_shape)
    flat = basis.reshape(-1)
    for k in range(n_in):
        flat[k] = 1.0
        mat[:, k] = np.asarray(apply_fn(basis)).reshape(-1)
        flat[k] = 0.0
    return mat


def dense_stacked_system(A: BccbOperator, shape):
    """Dense H for the splitting z1=Au, z2=Du-w, z3=Ew, z4=u.

    Rows: [A 0; D -I; 0 E; I 0] acting on x = (u, w1, w2) flattened.
    Returns (H, n) with n the pixel count.
    """
    n1, n2 = shape
    n = n1 * n2
    A_mat = dense_matrix_from_linear_map(A.apply, shape, shape)
    D_mat = dense_matrix_from_linear_map(grad, shape, (2, n1, n2))
    E_mat = dense_matrix_from_linear_map(sym_grad, (2, n1, n2), (4, n1, n2))
    I_n = np.eye(n)
    top = np.hstack([A_mat, np.zeros((n, 2 * n))])
    mid = np.hstack([D_mat, -np.eye(2 * n)])
    sym = np.hstack([np.zeros((4 * n, n)), E_mat])
    bot = np.hstack([I_n, np.zeros((n, 2 * n))])
    return np.vstack([top, mid, sym, bot]), n


def adjoint_residual(apply_fn, adjoint_fn, x, y) -> float:
    """|<Ox, y> - <x, O^T y>| / (||x|| ||y||)."""
    lhs = float(np.sum(np.asarray(apply_fn(x)) * y))
    rhs = float(np.sum(x * np.asarray(adjoint_fn(y))))
    scale = float(np.linalg.norm(x) * np.linalg.norm(y))
    return abs(lhs - rhs) / max(scale, 1e-300)

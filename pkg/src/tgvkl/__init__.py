"""Poisson deblurring with second-order TGV regularization.

Restores images degraded by a known periodic blur and Poisson noise by
minimizing a Kullback-Leibler fidelity plus a TGV2 penalty. The two TGV2
weights are estimated by an alternating scheme with gamma hyperpriors, and
the balance between fidelity and penalty is set along the iterations by a
discrepancy principle.
"""

from tgvkl.images import Image, read_image, write_image, read_csv, write_csv
from tgvkl.operators import (
    BccbOperator,
    FourierSystem,
    assemble_fourier_system,
    gaussian_psf,
    grad,
    grad_adjoint,
    sym_grad,
    sym_grad_adjoint,
)
from tgvkl.noise import DegradeConfig, Rng, degrade, poisson_sample
from tgvkl.metrics import isnr, kl_divergence, ssim
from tgvkl.prox import (
    TauSolveOptions,
    TauStatus,
    discrepancy_derivative,
    discrepancy_of_tau,
    shrink_groups,
    solve_tau,
    z1_update,
    z4_update,
)
from tgvkl.admm import AdmmResult, AdmmState, SolveOptions, admm_tgv_kl, admm_tv_kl
from tgvkl.hyper import (
    HyperState,
    OuterOptions,
    OuterResult,
    alpha_updates,
    fit_gamma_hyperprior,
    ml_init_alphas,
    outer_scheme,
)
from tgvkl.testimages import phantom

__all__ = [
    "Image", "read_image", "write_image", "read_csv", "write_csv",
    "BccbOperator", "FourierSystem", "assemble_fourier_system", "gaussian_psf",
    "grad", "grad_adjoint", "sym_grad", "sym_grad_adjoint",
    "DegradeConfig", "Rng", "degrade", "poisson_sample",
    "isnr", "kl_divergence", "ssim",
    "TauSolveOptions", "TauStatus", "discrepancy_derivative",
    "discrepancy_of_tau", "shrink_groups", "solve_tau", "z1_update", "z4_update",
    "AdmmResult", "AdmmState", "SolveOptions", "admm_tgv_kl", "admm_tv_kl",
    "HyperState", "OuterOptions", "OuterResult", "alpha_updates",
    "fit_gamma_hyperprior", "ml_init_alphas", "outer_scheme",
    "phantom",
]

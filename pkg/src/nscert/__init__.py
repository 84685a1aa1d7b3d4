"""nscert: certified spectral Galerkin solutions of incompressible
Navier-Stokes on the d-torus, with a-posteriori error tubes."""

from .constants import Bracket, BilinearConstant, bilinear_constant, kernel_bracket, sigma_bracket
from .fields import (
    ForcingModel,
    FourierField,
    FrameReduction,
    GalerkinSet,
    advect,
    galerkin_project,
    galerkin_resolution,
    leray_project,
    mean_and_divergence,
    nonlinearity,
    random_solenoidal_field,
    reconstruct_frame,
    reduce_to_zero_mean,
    sobolev_norm,
)
from .semigroup import mittag_leffler, navier_stokes_estimator

__version__ = "0.1.0"

__all__ = [
    "Bracket",
    "BilinearConstant",
    "ForcingModel",
    "FourierField",
    "FrameReduction",
    "GalerkinSet",
    "advect",
    "bilinear_constant",
    "galerkin_project",
    "galerkin_resolution",
    "kernel_bracket",
    "leray_project",
    "mean_and_divergence",
    "mittag_leffler",
    "navier_stokes_estimator",
    "nonlinearity",
    "random_solenoidal_field",
    "reconstruct_frame",
    "reduce_to_zero_mean",
    "sigma_bracket",
    "sobolev_norm",
]

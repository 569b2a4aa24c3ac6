"""Exact truncated Fock-space reference engine."""

from .evolve import fock_evolve, krylov_expm_apply
from .excitation import ExcitationMap, embed_excitations, excitation_decompose
from .fock import (
    FockSpace,
    FockVector,
    assemble_bogoliubov_H,
    assemble_dGamma,
    assemble_HN,
    assemble_pair_ops,
    product_state,
)
from .scenario import compare_oracle, fit_slope, generator_residual, norm_approx_error
from .states import (
    build_quasi_free,
    extract_density_matrices,
    moment,
    moment_bound_check,
    number_variance_wick,
    wick_defect,
)

__all__ = [
    "ExcitationMap",
    "FockSpace",
    "FockVector",
    "assemble_HN",
    "assemble_bogoliubov_H",
    "assemble_dGamma",
    "assemble_pair_ops",
    "build_quasi_free",
    "compare_oracle",
    "embed_excitations",
    "excitation_decompose",
    "extract_density_matrices",
    "fit_slope",
    "fock_evolve",
    "generator_residual",
    "krylov_expm_apply",
    "moment",
    "moment_bound_check",
    "norm_approx_error",
    "number_variance_wick",
    "product_state",
    "wick_defect",
]

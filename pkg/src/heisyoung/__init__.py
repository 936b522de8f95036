"""Sharp Young trilinear functionals on Euclidean space and Heisenberg groups.

The package computes the sharp constants and optimal-Gaussian structure of
the trilinear convolution form, evaluates the Euclidean, twisted, and
Heisenberg forms on Gaussian data, implements the symmetry group exactly,
factors matrices through the symplectic group, solves the robust functional
equations arising from near-extremizer slices, and runs the desk-scale
near-extremizer analysis pipeline.
"""

from .exponents import (
    ExponentProfile,
    conjugate_exponent,
    exponent_profile,
    gamma_ratios,
    gamma_stationarity_residual,
    parse_exponent,
    sharp_constant,
)
from .functional_equations import (
    DifferenceDataset,
    FESampleSet,
    FESolution,
    curl_project,
    estimate_bilinear_phase,
    integrate_difference,
    multi_indices,
    poly_eval,
    recover_linear_phase,
    solve_additive_fe,
    solve_heis_fe,
)
from .gaussians import (
    CompatibleTripleSpec,
    GaussianH,
    GaussianR,
    QuadratureSpec,
    compatible_euclid_triple,
    lp_norm,
)
from .heisenberg import (
    HeisPoint,
    heis_identity,
    heis_inv,
    heis_mul,
    is_symplectic,
    sigma,
    standard_symplectic_form,
)
from .pipeline import (
    PipelineReport,
    SampledTriple,
    SliceFit,
    analyze_near_extremizer,
    decompose_marginal,
    fit_slices,
    make_diffuse_triple,
    sample_triple,
)
from .robust import inlier_mask, lad_fit, residual_stats
from .symmetries import (
    AffineMap,
    BiTranslation,
    Dilation,
    Modulation,
    Symplectic,
    SymmetryWord,
    VerticalShear,
    apply_symmetry,
    element_inverse,
    word_inverse,
)
from .symplectic_factorization import (
    FactorizationResult,
    antisymmetric_canonical,
    canonical_blocks,
    random_symplectic,
    symplectic_factor,
)
from .trilinear import (
    QuadratureConvergenceError,
    oracle_tensor_quadrature,
    phi_ratio,
    trilinear_euclid,
    trilinear_heis,
    trilinear_twisted,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "BiTranslation",
    "CompatibleTripleSpec",
    "DifferenceDataset",
    "Dilation",
    "ExponentProfile",
    "FESampleSet",
    "FESolution",
    "FactorizationResult",
    "GaussianH",
    "GaussianR",
    "HeisPoint",
    "Modulation",
    "PipelineReport",
    "QuadratureConvergenceError",
    "QuadratureSpec",
    "SampledTriple",
    "SliceFit",
    "Symplectic",
    "SymmetryWord",
    "VerticalShear",
    "analyze_near_extremizer",
    "apply_symmetry",
    "antisymmetric_canonical",
    "canonical_blocks",
    "compatible_euclid_triple",
    "conjugate_exponent",
    "decompose_marginal",
    "element_inverse",
    "curl_project",
    "estimate_bilinear_phase",
    "exponent_profile",
    "fit_slices",
    "gamma_ratios",
    "gamma_stationarity_residual",
    "heis_identity",
    "heis_inv",
    "heis_mul",
    "inlier_mask",
    "is_symplectic",
    "integrate_difference",
    "lad_fit",
    "lp_norm",
    "make_diffuse_triple",
    "multi_indices",
    "oracle_tensor_quadrature",
    "parse_exponent",
    "phi_ratio",
    "poly_eval",
    "random_symplectic",
    "recover_linear_phase",
    "residual_stats",
    "sample_triple",
    "sharp_constant",
    "sigma",
    "solve_additive_fe",
    "solve_heis_fe",
    "standard_symplectic_form",
    "symplectic_factor",
    "trilinear_euclid",
    "trilinear_heis",
    "trilinear_twisted",
    "word_inverse",
]

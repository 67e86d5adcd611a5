"""Numerical checks of the ensemble/kernel identities."""

from .counterexample import CASES, counterexample_expectation, counterexample_moments
from .expectation import (
    ExpectationTermSample,
    ExpectationTermSamples,
    expectation_term_samples,
    gaussian_expectation_term_samples,
    ridge_expectation_term_samples,
)
from .ridge import (
    RidgePathReport,
    ensemble_lipschitz_diagnostic,
    kernel_bound_constants,
    krr_lipschitz_bound,
    path_jumps,
    refinement_grid,
    shrinks_to_zero,
)
from .underparam import UnderparamResult, transformed_block_matrix, underparam_transformed_kernel
from .variance import (
    gaussian_feature_predictions,
    gaussian_variance_formula,
    ratio_spread,
    variance_vs_gp_profile,
)

__all__ = [
    "CASES", "counterexample_expectation", "counterexample_moments",
    "ExpectationTermSample", "ExpectationTermSamples", "expectation_term_samples",
    "gaussian_expectation_term_samples", "ridge_expectation_term_samples",
    "RidgePathReport", "ensemble_lipschitz_diagnostic", "kernel_bound_constants",
    "krr_lipschitz_bound", "path_jumps", "refinement_grid", "shrinks_to_zero",
    "UnderparamResult", "transformed_block_matrix", "underparam_transformed_kernel",
    "gaussian_feature_predictions", "gaussian_variance_formula", "ratio_spread",
    "variance_vs_gp_profile",
]

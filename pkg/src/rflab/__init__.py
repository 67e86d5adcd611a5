"""Random-feature ensembles, their limiting kernel regressors, and checks of
the identities that relate them."""

__version__ = "0.1.0"

from .errors import (
    ConditioningFailure,
    ConfigError,
    ContractionViolated,
    DegenerateTestPoint,
    DimensionMismatch,
    InsufficientRows,
    InvalidRegime,
    ParseError,
    RFLabError,
    SolverFailure,
)
from .features import (
    ActivationSpec,
    FeatureConfig,
    FeatureDraw,
    WeightDistSpec,
    feature_matrix,
    member_seed,
    sample_features,
)
from .kernels import (
    KernelMatrix,
    KernelSpec,
    WhitenedSystem,
    arc_cosine_kernel,
    empirical_kernel,
    erf_kernel,
    extend_whiten,
    gp_posterior_variance,
    kernel_matrix,
)
from .regressors import (
    KernelRegressor,
    TrainedRFModel,
    fit_kernel_regressor,
    fit_min_norm,
    fit_rf,
    fit_ridge,
    predict_kernel,
    predict_rf,
)
from .ensembles import (
    EnsembleConfig,
    EnsembleResult,
    budget_matched_comparison,
    build_ensemble,
    ensemble_predict,
    hockey_stick_curve,
    mc_infinite_ensemble,
)
from .data import Dataset, housing_like_dataset, load_calhousing, synth_dataset

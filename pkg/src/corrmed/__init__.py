"""Mediation analysis with correlated additive errors.

The model has a binary treatment z, a mediator m, and an outcome r with

    m = a*z + e1,    r = c*z + b*m + e2,

where (e1, e2) are jointly normal with correlation delta. Because delta is
not identifiable from one session, the package provides closed-form
estimates at a fixed delta (``fit_single``), sensitivity profiles over
delta, and multilevel estimators that recover delta from between-session
structure (``cma_ml``, ``cma_h``, ``cma_ts``, ``cma_h_ts``), plus a wild
bootstrap for interval estimates and seeded generators for the benchmark
designs. The ``corrmed`` command line exposes the same surface on CSV
files.
"""

__version__ = "0.1.0"

from .core import (
    MultilevelDataset,
    NoiseCov,
    PathCoefficients,
    ResidualCov,
    SessionKey,
    TrialSeries,
    center,
    validate_dataset,
    validate_series,
)
from .errors import (
    AllEqualReplicates,
    CorrmedError,
    DegenerateTreatment,
    LengthMismatch,
    MissingDelta,
    NegativeVariance,
    NumericalError,
    OptimFailed,
    ParseError,
    ReplicateFailure,
    SingularDesign,
    SingularResiduals,
    TooFewTrials,
    UnknownQuantity,
    ValidationError,
)
from .inference import (
    BootstrapRun,
    IntervalEstimate,
    asymptotic_ci,
    bc_interval,
    wild_bootstrap,
)
from .lmm import (
    GroupedValues,
    RandomInterceptFit,
    fit_random_intercept,
    loglik_at,
)
from .multilevel import (
    DeltaSearchResult,
    HState,
    MixedEffectsFit,
    SessionwiseFits,
    cma_h,
    cma_h_inner,
    cma_h_ts,
    cma_ml,
    cma_ts,
    fit_sessionwise,
    h_likelihood,
    optimize_delta,
    pool_sessions,
)
from .simulate import (
    DESIGN_NAMES,
    MonteCarloSummary,
    MultilevelConfig,
    SingleLevelConfig,
    gen_multilevel,
    gen_single,
    monte_carlo,
    named_design,
)
from .single_level import (
    SingleLevelFit,
    SuffStats,
    fit_single,
    profile_loglik_curve,
)

__all__ = [
    "__version__",
    # core containers
    "TrialSeries", "MultilevelDataset", "SessionKey", "PathCoefficients",
    "NoiseCov", "ResidualCov", "center", "validate_series", "validate_dataset",
    # single-session estimation
    "SingleLevelFit", "SuffStats", "fit_single", "profile_loglik_curve",
    # mixed-effects machinery
    "GroupedValues", "RandomInterceptFit", "fit_random_intercept", "loglik_at",
    # multilevel estimators
    "MixedEffectsFit", "SessionwiseFits", "HState", "DeltaSearchResult",
    "fit_sessionwise", "pool_sessions", "h_likelihood", "cma_h_inner",
    "optimize_delta", "cma_ml", "cma_h", "cma_ts", "cma_h_ts",
    # inference
    "IntervalEstimate", "BootstrapRun", "wild_bootstrap", "bc_interval",
    "asymptotic_ci",
    # simulation
    "SingleLevelConfig", "MultilevelConfig", "MonteCarloSummary",
    "gen_single", "gen_multilevel", "monte_carlo", "named_design",
    "DESIGN_NAMES",
    # errors
    "CorrmedError", "ValidationError", "LengthMismatch", "DegenerateTreatment",
    "TooFewTrials", "MissingDelta", "ParseError", "UnknownQuantity",
    "NumericalError", "SingularDesign", "SingularResiduals", "NegativeVariance",
    "OptimFailed", "ReplicateFailure", "AllEqualReplicates",
]

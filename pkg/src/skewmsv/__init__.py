"""Cholesky multivariate stochastic volatility with GH skew-t structural errors,
leverage, and spike-and-slab skew selection."""

from .data_io import ReturnsPanel, RunConfig, load_prices_csv, order_series
from .distributions import (
    GhSkewTParams,
    GigParams,
    mvn_logpdf,
    sample_gig,
    sample_inverse_gamma,
    sample_truncated_gamma,
    skewt_draw,
)
from .engine import (
    ChainDiagnostics,
    McmcDraws,
    diagnostics,
    geweke_joint_test,
    load_draws,
    run_mcmc,
    save_draws,
)
from .forecast import (
    ForecastPlan,
    PredictiveDrawSet,
    lpdr,
    predictive_draws,
    predictive_logdensity,
    recursive_forecast,
)
from .msv_core import (
    CovParams,
    LatentStates,
    ModelConfig,
    PriorSet,
    PRIOR_PRESETS,
    SeriesParams,
    SparsityState,
    build_A,
    sigma_t,
    structural_transform,
)
from .portfolio import (
    VarReport,
    kupiec_test,
    minvar_portfolio,
    target_portfolio,
    var_quantile,
)
from .simulate import SimScenario, generate_dataset, sample_skewness, skewness_study

__version__ = "0.1.0"

"""VIX-normalized CAPM with a size factor.

Fit the size-CAPM regressions to monthly decile data, simulate the Markov
market model, check its log-contraction stability condition and study the
resulting capital distribution curves.
"""

__version__ = "0.1.0"

from .curves import CurvePoints
from .data import (
    DecilePanel,
    ModelDataset,
    MonthKey,
    MonthlyPanel,
    MonthlySeries,
    build_dataset,
    load_french_deciles,
    load_fred_series,
)
from .extremes import (
    GumbelConstants,
    PoissonArrivals,
    gumbel_constants,
    log_gap_samples,
    lower_curve,
    normal_market_curve,
    simulate_arrivals,
    top_k_standardized,
    upper_curve,
)
from .market import (
    ConditionalMoments,
    ModelParams,
    SimPaths,
    capital_curve,
    conditional_moments,
    market_weights,
    simulate_market,
    simulate_premia,
    standardize_curve,
)
from .regression import OlsFit, SizeCapmFit, fit_premia_model, fit_returns_model, jarque_bera, ljung_box_abs, ols_fit
from .stability import RegionGrid, StabilityReport, estimate_log_contraction, gaussian_log_moment, stability_region
from .volatility import (
    Ar1Fit,
    GaussianParams,
    VarianceGammaParams,
    VixModel,
    fit_log_ar1,
    sample_vg,
    simulate_log_vix,
    stationary_moment,
)

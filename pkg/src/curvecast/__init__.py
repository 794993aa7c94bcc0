"""Forecasting intraday return curves, with intraday dynamic updating.

The pipeline: convert daily price paths into cumulative intraday
log-return curves, decompose them into a small number of orthonormal
components, model the component scores as a vector autoregression,
bootstrap that model to get day-ahead prediction intervals and uniform
bands, and refine the forecast during the trading day as new points
arrive.
"""

from .errors import ConfigError, CurvecastError, DataError, NumericalError
from .gridcurves import (
    FunctionalTimeSeries,
    IntradayGrid,
    PriceMatrix,
    cidr_transform,
    ingest_price_matrix,
    interpolate_missing,
    inverse_cidr,
    read_price_csv,
    write_wide_csv,
)
from .fpca import (
    FpcaModel,
    fit_fpca,
    model_from_json,
    model_to_json,
    project_scores,
    reconstruct,
    select_num_components,
    select_num_components_by_variance,
    weighted_pca,
)
from .varmodel import (
    VarModel,
    aicc,
    backward_innovation_transfer,
    companion_spectral_radius,
    fit_var,
    forecast_scores,
    select_order,
)
from .sieve import (
    BootstrapConfig,
    Far1Model,
    SieveForecast,
    SieveReplicates,
    derive_seed,
    draw_replicates,
    empirical_quantile,
    far1_fit,
    far1_forecast,
    forecast_to_json,
    future_curve,
    future_curves,
    generate_pseudo_series,
    pseudo_curves,
    sieve_prediction,
    ts_point_forecast,
    write_forecast_csv,
)
from .updating import (
    DEFAULT_LAMBDA_GRID,
    FlrModel,
    LambdaSchedule,
    TuningCase,
    UpdateContext,
    build_update_context,
    flr_fit,
    flr_interval_update,
    flr_update,
    observed_columns,
    ols_update,
    pls_coefficients,
    pls_interval_update,
    pls_update,
    schedule_from_json,
    schedule_to_json,
    select_lambda_from_cases,
    shrinkage_objective,
    tune_lambda,
    updating_columns,
)
from .evalharness import (
    BacktestPlan,
    MetricReport,
    ecp,
    interval_score,
    mean_interval_score,
    msfe,
    plan_hash,
    plan_to_dict,
    report_from_json,
    report_to_json,
    run_backtest,
    sign_prediction_probability,
    validate_plan,
    write_report_csvs,
)
from .datagen import SynthSpec, SynthTruth, generate, orthonormal_basis

__version__ = "0.1.0"

__all__ = [
    "BacktestPlan",
    "BootstrapConfig",
    "ConfigError",
    "CurvecastError",
    "DataError",
    "DEFAULT_LAMBDA_GRID",
    "Far1Model",
    "FlrModel",
    "FpcaModel",
    "FunctionalTimeSeries",
    "IntradayGrid",
    "LambdaSchedule",
    "MetricReport",
    "NumericalError",
    "PriceMatrix",
    "SieveForecast",
    "SieveReplicates",
    "SynthSpec",
    "SynthTruth",
    "TuningCase",
    "UpdateContext",
    "VarModel",
    "aicc",
    "backward_innovation_transfer",
    "build_update_context",
    "cidr_transform",
    "companion_spectral_radius",
    "derive_seed",
    "draw_replicates",
    "ecp",
    "empirical_quantile",
    "far1_fit",
    "far1_forecast",
    "fit_fpca",
    "fit_var",
    "flr_fit",
    "flr_interval_update",
    "flr_update",
    "forecast_scores",
    "forecast_to_json",
    "future_curve",
    "future_curves",
    "generate",
    "generate_pseudo_series",
    "ingest_price_matrix",
    "interpolate_missing",
    "interval_score",
    "inverse_cidr",
    "mean_interval_score",
    "model_from_json",
    "model_to_json",
    "msfe",
    "observed_columns",
    "ols_update",
    "orthonormal_basis",
    "plan_hash",
    "plan_to_dict",
    "pls_coefficients",
    "pls_interval_update",
    "pls_update",
    "project_scores",
    "pseudo_curves",
    "read_price_csv",
    "reconstruct",
    "report_from_json",
    "report_to_json",
    "run_backtest",
    "schedule_from_json",
    "schedule_to_json",
    "select_lambda_from_cases",
    "select_num_components",
    "select_num_components_by_variance",
    "select_order",
    "shrinkage_objective",
    "sieve_prediction",
    "sign_prediction_probability",
    "ts_point_forecast",
    "tune_lambda",
    "updating_columns",
    "validate_plan",
    "weighted_pca",
    "write_forecast_csv",
    "write_report_csvs",
    "write_wide_csv",
]

"""Bayesian GARCH(1,1)/GARCH-X estimation via independence Metropolis-Hastings."""

from .garch import (
    GarchParams,
    ModelSpec,
    VariancePath,
    log_likelihood,
    persistence,
    simulate,
    variance_recursion,
)
from .mcmc import (
    Chain,
    ChainConfig,
    PosteriorSummary,
    ProposalDensity,
    SamplerError,
    export_chain_csv,
    fit_proposal,
    integrated_autocorrelation_time,
    log_posterior,
    mh_step,
    run_chain,
    run_independence_mh,
    sample_student_t,
    student_t_logpdf,
    summarize,
    tau_int,
)
from .study import StudyReport, parse_report, render_report, run_study
from .timeseries import (
    ColumnMap,
    DataError,
    PriceSeries,
    ReturnSeries,
    align_exogenous,
    build_return_series,
    compute_log_returns,
    load_csv,
    normalize_by_mean,
    pearson_correlation,
    prices_from_returns,
)

__version__ = "0.1.0"

__all__ = [
    "Chain",
    "ChainConfig",
    "ColumnMap",
    "DataError",
    "GarchParams",
    "ModelSpec",
    "PosteriorSummary",
    "PriceSeries",
    "ProposalDensity",
    "ReturnSeries",
    "SamplerError",
    "StudyReport",
    "VariancePath",
    "align_exogenous",
    "build_return_series",
    "compute_log_returns",
    "export_chain_csv",
    "fit_proposal",
    "integrated_autocorrelation_time",
    "load_csv",
    "log_likelihood",
    "log_posterior",
    "mh_step",
    "normalize_by_mean",
    "parse_report",
    "pearson_correlation",
    "persistence",
    "prices_from_returns",
    "render_report",
    "run_chain",
    "run_independence_mh",
    "sample_student_t",
    "simulate",
    "student_t_logpdf",
    "summarize",
    "tau_int",
    "variance_recursion",
]

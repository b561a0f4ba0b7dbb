"""GARCH(1,1) and exogenous-augmented GARCH: recursion, likelihood, simulator.

Model: r_t = sigma_t * eps_t with eps_t ~ N(0,1) and

    sigma2[t] = omega + alpha * r[t-1]^2 + beta * sigma2[t-1] (+ gamma * N[t])

where N is a mean-1 exogenous series (volume or transaction count). Returns
are in percent units, so omega and sigma2 are in %^2.

Conventions (the recursion itself fixes neither):
- sigma2[0] defaults to the sample variance (ddof=1) of the return series;
  an explicit positive override is available through ModelSpec.
- The likelihood is conditional on sigma2[0]; no presample terms.
- No stationarity constraint: alpha + beta may reach or exceed 1, as
  empirical persistence estimates sit close to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .timeseries import ReturnSeries

_EMPTY = np.zeros(0, dtype=np.float64)


@dataclass(frozen=True)
class GarchParams:
    """Parameter vector (omega, alpha, beta, optional gamma), all in model units."""

    omega: float
    alpha: float
    beta: float
    gamma: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise ValueError(f"omega must be finite and > 0, got {self.omega}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.gamma is not None and not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")

    @property
    def names(self) -> tuple[str, ...]:
        if self.gamma is None:
            return ("omega", "alpha", "beta")
        return ("omega", "alpha", "beta", "gamma")

    def to_vector(self) -> np.ndarray:
        if self.gamma is None:
            return np.array([self.omega, self.alpha, self.beta])
        return np.array([self.omega, self.alpha, self.beta, self.gamma])

    @staticmethod
    def from_vector(vec: np.ndarray) -> "GarchParams":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape == (3,):
            return GarchParams(float(vec[0]), float(vec[1]), float(vec[2]))
        if vec.shape == (4,):
            return GarchParams(float(vec[0]), float(vec[1]), float(vec[2]), float(vec[3]))
        raise ValueError(f"parameter vector must have length 3 or 4, got shape {vec.shape}")


@dataclass(frozen=True)
class ModelSpec:
    """Which exogenous series the variance equation uses, and how sigma2[0] is set.

    initial_variance None means: use the sample variance of the returns.
    """

    exogenous_mode: str = "none"
    initial_variance: float | None = None

    def __post_init__(self) -> None:
        if self.exogenous_mode not in ("none", "volume", "transactions"):
            raise ValueError(f"unknown exogenous mode {self.exogenous_mode!r}")
        if self.initial_variance is not None and not (
            math.isfinite(self.initial_variance) and self.initial_variance > 0.0
        ):
            raise ValueError("explicit initial variance must be finite and > 0")


@dataclass(frozen=True)
class VariancePath:
    """Conditional variances sigma2[t], aligned 1:1 with a ReturnSeries."""

    variances: np.ndarray

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.variances, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "variances", v)
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise FloatingPointError("conditional variances must be finite and > 0")

    def __len__(self) -> int:
        return len(self.variances)


@njit(cache=True)
def _sigma2_kernel(returns, exo, has_exo, omega, alpha, beta, gamma, sigma2_init, out):
    s = sigma2_init
    out[0] = s
    for t in range(1, returns.shape[0]):
        s = omega + alpha * returns[t - 1] * returns[t - 1] + beta * s
        if has_exo:
            s += gamma * exo[t]
        out[t] = s


@njit(cache=True)
def _loglik_kernel(returns, exo, has_exo, omega, alpha, beta, gamma, sigma2_init):
    n = returns.shape[0]
    s = sigma2_init
    acc = 0.0
    for t in range(n):
        if t > 0:
            s = omega + alpha * returns[t - 1] * returns[t - 1] + beta * s
            if has_exo:
                s += gamma * exo[t]
        if not np.isfinite(s) or s <= 0.0:
            return -np.inf
        acc += np.log(s) + returns[t] * returns[t] / s
    return -0.5 * (n * np.log(2.0 * np.pi) + acc)


@njit(cache=True)
def _simulate_kernel(innovations, exo, has_exo, omega, alpha, beta, gamma, sigma2_init, out):
    s = sigma2_init
    for t in range(innovations.shape[0]):
        if t > 0:
            s = omega + alpha * out[t - 1] * out[t - 1] + beta * s
            if has_exo:
                s += gamma * exo[t]
        out[t] = np.sqrt(s) * innovations[t]


def _check_inputs(params: GarchParams, returns: ReturnSeries) -> None:
    if (params.gamma is not None) != (returns.exogenous is not None):
        raise ValueError(
            "exogenous series must be present exactly when gamma is present"
        )
    if len(returns) < 1:
        raise ValueError("empty return series")


def initial_variance(returns: ReturnSeries, spec: ModelSpec) -> float:
    """sigma2[0]: the explicit override if set, else the sample variance."""
    if spec.initial_variance is not None:
        return spec.initial_variance
    if len(returns) < 2:
        raise ValueError("sample-variance initialization needs at least 2 returns")
    return float(np.var(returns.returns, ddof=1))


def variance_recursion(
    params: GarchParams, returns: ReturnSeries, spec: ModelSpec
) -> VariancePath:
    """Run the conditional-variance recursion over the whole return series."""
    _check_inputs(params, returns)
    out = np.empty(len(returns))
    exo = returns.exogenous if returns.exogenous is not None else _EMPTY
    _sigma2_kernel(
        returns.returns,
        exo,
        returns.exogenous is not None,
        params.omega,
        params.alpha,
        params.beta,
        params.gamma if params.gamma is not None else 0.0,
        initial_variance(returns, spec),
        out,
    )
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("variance recursion produced a non-finite value")
    return VariancePath(out)


def log_likelihood(params: GarchParams, returns: ReturnSeries, spec: ModelSpec) -> float:
    """Gaussian log-likelihood of the returns, conditional on sigma2[0].

    ll = -1/2 * sum_t [ ln(2 pi sigma2[t]) + r[t]^2 / sigma2[t] ],
    evaluated in the log domain throughout.
    """
    _check_inputs(params, returns)
    exo = returns.exogenous if returns.exogenous is not None else _EMPTY
    ll = _loglik_kernel(
        returns.returns,
        exo,
        returns.exogenous is not None,
        params.omega,
        params.alpha,
        params.beta,
        params.gamma if params.gamma is not None else 0.0,
        initial_variance(returns, spec),
    )
    if not math.isfinite(ll):
        raise FloatingPointError("log-likelihood is not finite for these parameters")
    return float(ll)


def persistence(params: GarchParams) -> float:
    """Volatility persistence alpha + beta (near 1: long-lived shocks)."""
    return params.alpha + params.beta


def simulate(
    params: GarchParams,
    length: int,
    seed: int,
    exogenous: np.ndarray | None = None,
    label: str = "volume",
    innovations: np.ndarray | None = None,
) -> ReturnSeries:
    """Draw a synthetic return path r_t = sigma_t * eps_t, eps_t iid N(0,1).

    The exogenous series, when present, must already be mean-normalized
    (that is the only form the model ever sees). sigma2[0] is set to the
    stationary unconditional variance (omega + gamma*mean(N)) / (1-alpha-beta)
    when alpha+beta < 1, else to omega + gamma*mean(N).

    `innovations` overrides the N(0,1) draw (test hook); it must have the
    requested length.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if (params.gamma is not None) != (exogenous is not None):
        raise ValueError("exogenous series must be supplied exactly when gamma is present")
    exo_mean = 0.0
    if exogenous is not None:
        exogenous = np.asarray(exogenous, dtype=np.float64)
        if len(exogenous) != length:
            raise ValueError(f"exogenous length {len(exogenous)} != {length}")
        exo_mean = float(np.mean(exogenous))
    if innovations is None:
        innovations = np.random.default_rng(seed).standard_normal(length)
    else:
        innovations = np.asarray(innovations, dtype=np.float64)
        if len(innovations) != length:
            raise ValueError(f"innovations length {len(innovations)} != {length}")

    gamma = params.gamma if params.gamma is not None else 0.0
    base = params.omega + gamma * exo_mean
    p = persistence(params)
    sigma2_init = base / (1.0 - p) if p < 1.0 else base

    out = np.empty(length)
    _simulate_kernel(
        innovations,
        exogenous if exogenous is not None else _EMPTY,
        exogenous is not None,
        params.omega,
        params.alpha,
        params.beta,
        gamma,
        sigma2_init,
        out,
    )
    return ReturnSeries(
        returns=out,
        exogenous=exogenous,
        label=label if exogenous is not None else "none",
    )

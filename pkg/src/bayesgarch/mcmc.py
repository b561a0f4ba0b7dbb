"""Independence Metropolis-Hastings with a multivariate Student-t proposal.

Protocol: an adaptive burn-in phase (default 5000 steps) refits the proposal
from the accumulated burn-in states every `adapt_interval` steps, then the
proposal is frozen and `samples` states (default 50000) are retained for
measurement, repeats on rejection included. The posterior is the Gaussian
GARCH likelihood under a flat improper prior on the positivity region, so
the posterior mode coincides with the MLE.

Everything here is deterministic given the config seed: a single
numpy Generator drives proposal draws and accept/reject decisions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .garch import GarchParams, ModelSpec, _loglik_kernel, initial_variance
from .timeseries import ReturnSeries

LogTarget = Callable[[np.ndarray], float]


class SamplerError(RuntimeError):
    """Raised when the sampler cannot run or degenerates (flat-lined chain)."""


def _frozen_array(a) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ProposalDensity:
    """Multivariate Student-t: location, positive-definite scale matrix, dof.

    The density (and hence logpdf) is well-defined for any dof > 0; proposals
    actually driving the sampler need dof > 2 (finite covariance), which is
    enforced at the sampler entry points.
    """

    location: np.ndarray
    scale: np.ndarray
    dof: float

    def __post_init__(self) -> None:
        loc = _frozen_array(self.location)
        scale = _frozen_array(self.scale)
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "scale", scale)
        d = loc.shape[0]
        if loc.ndim != 1 or scale.shape != (d, d):
            raise ValueError(f"location/scale shapes {loc.shape}/{scale.shape} inconsistent")
        if not self.dof > 0.0:
            raise ValueError(f"dof must be > 0, got {self.dof}")
        if not np.allclose(scale, scale.T, rtol=0.0, atol=1e-10 * (1.0 + np.abs(scale).max())):
            raise ValueError("scale matrix must be symmetric")
        try:
            chol = np.linalg.cholesky(scale)
        except np.linalg.LinAlgError as exc:
            raise ValueError("scale matrix is not positive definite") from exc
        chol.flags.writeable = False
        inv_scale = np.linalg.inv(scale)
        inv_scale.flags.writeable = False
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        log_norm = (
            math.lgamma(0.5 * (self.dof + d))
            - math.lgamma(0.5 * self.dof)
            - 0.5 * d * math.log(self.dof * math.pi)
            - 0.5 * log_det
        )
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_inv_scale", inv_scale)
        object.__setattr__(self, "_log_norm", log_norm)

    @property
    def dim(self) -> int:
        return self.location.shape[0]


@dataclass(frozen=True)
class ChainConfig:
    """Sampler protocol knobs; the defaults are the reference protocol counts."""

    burn_in: int = 5000
    samples: int = 50000
    seed: int = 0
    dof: float = 10.0
    adapt_interval: int = 500
    scale_inflation: float = 1.2

    def __post_init__(self) -> None:
        if self.burn_in < 1 or self.samples < 1 or self.adapt_interval < 1:
            raise ValueError("burn_in, samples and adapt_interval must be positive")
        if not self.dof > 2.0:
            raise ValueError("proposal dof must be > 2")
        if not self.scale_inflation >= 1.0:
            raise ValueError("scale inflation must be >= 1")


@dataclass(frozen=True)
class Chain:
    """Retained post-burn-in states plus the frozen measurement proposal."""

    draws: np.ndarray
    log_posteriors: np.ndarray
    acceptance_rate: float
    config: ChainConfig
    parameter_names: tuple[str, ...]
    proposal: ProposalDensity

    def __post_init__(self) -> None:
        object.__setattr__(self, "draws", _frozen_array(self.draws))
        object.__setattr__(self, "log_posteriors", _frozen_array(self.log_posteriors))
        object.__setattr__(self, "parameter_names", tuple(self.parameter_names))
        if self.draws.shape != (self.config.samples, len(self.parameter_names)):
            raise ValueError(f"draws shape {self.draws.shape} inconsistent with config")


@dataclass(frozen=True)
class PosteriorSummary:
    """Per-parameter posterior mean/SD over retained draws, plus alpha+beta mean."""

    parameter_names: list[str]
    mean: dict[str, float]
    sd: dict[str, float]
    persistence_mean: float
    acceptance_rate: float


def student_t_logpdf(x: np.ndarray, q: ProposalDensity) -> float:
    """Log-density of the multivariate Student-t, normalizing constant included."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (q.dim,):
        raise ValueError(f"point has shape {x.shape}, proposal has dimension {q.dim}")
    diff = x - q.location
    maha = float(diff @ (q._inv_scale @ diff))
    if maha < 0.0:  # roundoff at x ~ location
        maha = 0.0
    return q._log_norm - 0.5 * (q.dof + q.dim) * math.log1p(maha / q.dof)


def sample_student_t(q: ProposalDensity, rng: np.random.Generator) -> np.ndarray:
    """One draw: location + chol(scale) @ z * sqrt(dof / chi2_dof)."""
    z = rng.standard_normal(q.dim)
    w = rng.chisquare(q.dof)
    return q.location + (q._chol @ z) * math.sqrt(q.dof / w)


class MhStep(NamedTuple):
    params: np.ndarray
    log_post: float
    accepted: bool
    log_ratio: float
    log_q: float  # proposal log-density at the returned state


def mh_step(
    current: np.ndarray,
    current_log_post: float,
    q: ProposalDensity,
    log_target: LogTarget,
    rng: np.random.Generator,
    current_log_q: float | None = None,
) -> MhStep:
    """One independence-MH transition.

    Acceptance probability min(1, p(x')q(x) / (p(x)q(x'))), evaluated in the
    log domain. Rejected proposals repeat the current state. A uniform is
    consumed every step regardless of the accept branch, so chains are
    reproducible from the rng state alone.
    """
    if not math.isfinite(current_log_post):
        raise SamplerError("current state must have a finite log-posterior")
    candidate = sample_student_t(q, rng)
    cand_log_post = float(log_target(candidate))
    lq_cur = student_t_logpdf(current, q) if current_log_q is None else current_log_q
    lq_cand = student_t_logpdf(candidate, q)
    log_ratio = (cand_log_post - current_log_post) + (lq_cur - lq_cand)
    u = rng.random()
    if log_ratio > -math.inf and (
        log_ratio >= 0.0 or u == 0.0 or math.log(u) < log_ratio
    ):
        return MhStep(candidate, cand_log_post, True, log_ratio, lq_cand)
    return MhStep(current, current_log_post, False, log_ratio, lq_cur)


def fit_proposal(
    pilot_draws: np.ndarray, dof: float, scale_inflation: float
) -> ProposalDensity:
    """Student-t fitted to pilot draws: mean location, inflated sample covariance.

    Requires at least dim+2 draws with nonzero scatter. A diagonal jitter of
    1e-10 is added if the inflated covariance is not Cholesky-factorizable.
    """
    pilot = np.asarray(pilot_draws, dtype=np.float64)
    if pilot.ndim != 2:
        raise ValueError("pilot draws must be a (n, dim) matrix")
    if not dof > 2.0:
        raise ValueError(f"proposal dof must be > 2 for a finite covariance, got {dof}")
    n, d = pilot.shape
    if n < d + 2:
        raise SamplerError(f"need at least dim+2={d + 2} pilot draws, got {n}")
    if np.all(pilot == pilot[0]):
        raise SamplerError("pilot draws have zero scatter")
    location = pilot.mean(axis=0)
    cov = np.atleast_2d(np.cov(pilot, rowvar=False, ddof=1))
    scale = (scale_inflation**2) * cov
    try:
        np.linalg.cholesky(scale)
    except np.linalg.LinAlgError:
        scale = scale + 1e-10 * np.eye(d)
        try:
            np.linalg.cholesky(scale)
        except np.linalg.LinAlgError as exc:
            raise SamplerError("pilot covariance is rank-deficient even after jitter") from exc
    return ProposalDensity(location=location, scale=scale, dof=dof)


def _support_ok(vec: np.ndarray) -> bool:
    return vec[0] > 0.0 and bool(np.all(vec[1:] >= 0.0))


def log_posterior(
    params: GarchParams | np.ndarray, returns: ReturnSeries, spec: ModelSpec
) -> float:
    """Log-likelihood plus flat improper log-prior (0 inside the positivity
    region omega>0, alpha,beta[,gamma]>=0; -inf outside).

    -inf is a value, not an error: points outside the support, and parameter
    regions where the variance recursion diverges, simply have zero posterior
    mass.
    """
    if isinstance(params, GarchParams):
        vec = params.to_vector()
    else:
        vec = np.asarray(params, dtype=np.float64)
        if vec.shape not in ((3,), (4,)):
            raise ValueError(f"parameter vector must have length 3 or 4, got {vec.shape}")
    has_gamma = vec.shape[0] == 4
    if (returns.exogenous is not None) != has_gamma:
        raise ValueError("parameter dimension inconsistent with exogenous series")
    if not _support_ok(vec):
        return -math.inf
    exo = returns.exogenous if returns.exogenous is not None else np.zeros(0)
    return float(
        _loglik_kernel(
            returns.returns,
            exo,
            returns.exogenous is not None,
            vec[0],
            vec[1],
            vec[2],
            vec[3] if has_gamma else 0.0,
            initial_variance(returns, spec),
        )
    )


def run_independence_mh(
    log_target: LogTarget,
    start: np.ndarray,
    initial_proposal: ProposalDensity,
    config: ChainConfig,
    parameter_names: tuple[str, ...] | None = None,
) -> Chain:
    """Generic two-phase independence sampler.

    Phase A (burn-in): until the first refit, the initial diagonal proposal
    is recentered on the best point seen so far; from every adapt_interval
    boundary with at least dim+2 distinct accumulated states, the proposal is
    refitted to the accumulated burn-in states. Phase B: the proposal is
    frozen and config.samples states are retained.
    """
    rng = np.random.default_rng(config.seed)
    current = np.asarray(start, dtype=np.float64).copy()
    d = current.shape[0]
    if not initial_proposal.dof > 2.0:
        raise ValueError("sampling proposals need dof > 2 (finite covariance)")
    if parameter_names is None:
        parameter_names = tuple(f"x{i}" for i in range(d))
    current_lp = float(log_target(current))
    if not math.isfinite(current_lp):
        raise SamplerError("start point has non-finite log-target")
    q = initial_proposal
    current_lq = student_t_logpdf(current, q)

    history = np.empty((config.burn_in, d))
    best = current.copy()
    best_lp = current_lp
    fitted = False
    burn_accepts = 0
    for i in range(config.burn_in):
        step = mh_step(current, current_lp, q, log_target, rng, current_lq)
        current, current_lp, current_lq = step.params, step.log_post, step.log_q
        burn_accepts += step.accepted
        history[i] = current
        if step.accepted and current_lp > best_lp:
            best = current.copy()
            best_lp = current_lp
            if not fitted:
                q = ProposalDensity(location=best, scale=initial_proposal.scale, dof=q.dof)
                current_lq = student_t_logpdf(current, q)
        if (i + 1) % config.adapt_interval == 0:
            distinct = np.unique(history[: i + 1], axis=0).shape[0]
            if distinct >= d + 2:
                q = fit_proposal(history[: i + 1], config.dof, config.scale_inflation)
                fitted = True
                current_lq = student_t_logpdf(current, q)
    if burn_accepts == 0:
        raise SamplerError(
            "no proposal accepted during burn-in (flat-lined chain); "
            "try a different start point or a larger scale inflation"
        )

    frozen = q
    draws = np.empty((config.samples, d))
    log_posts = np.empty(config.samples)
    accepts = 0
    for i in range(config.samples):
        step = mh_step(current, current_lp, frozen, log_target, rng, current_lq)
        current, current_lp, current_lq = step.params, step.log_post, step.log_q
        accepts += step.accepted
        draws[i] = current
        log_posts[i] = current_lp
    return Chain(
        draws=draws,
        log_posteriors=log_posts,
        acceptance_rate=accepts / config.samples,
        config=config,
        parameter_names=parameter_names,
        proposal=frozen,
    )


def run_chain(data: ReturnSeries, spec: ModelSpec, config: ChainConfig) -> Chain:
    """Sample the GARCH posterior for one return series and model spec.

    Start point: omega = 0.1*Var(r), alpha = 0.1, beta = 0.8 (gamma = 0.1
    when the spec has an exogenous term); initial proposal scale is diagonal
    with standard deviations at 10% of each start value.
    """
    wants_exo = spec.exogenous_mode != "none"
    if wants_exo and data.exogenous is None:
        raise SamplerError(f"model spec wants {spec.exogenous_mode} but data has no exogenous series")
    if not wants_exo and data.exogenous is not None:
        raise SamplerError("data has an exogenous series but the model spec uses none")
    if len(data) < 2:
        raise SamplerError("need at least 2 returns to estimate")

    s2_init = initial_variance(data, spec)
    exo = data.exogenous if data.exogenous is not None else np.zeros(0)
    rets = data.returns

    def target(vec: np.ndarray) -> float:
        if not _support_ok(vec):
            return -math.inf
        return _loglik_kernel(
            rets,
            exo,
            wants_exo,
            vec[0],
            vec[1],
            vec[2],
            vec[3] if wants_exo else 0.0,
            s2_init,
        )

    var_r = float(np.var(rets, ddof=1))
    if var_r <= 0.0:
        raise SamplerError("returns have zero variance; nothing to estimate")
    start = np.array([0.1 * var_r, 0.1, 0.8, 0.1][: 4 if wants_exo else 3])
    names = ("omega", "alpha", "beta", "gamma")[: 4 if wants_exo else 3]
    proposal = ProposalDensity(
        location=start, scale=np.diag((0.1 * start) ** 2), dof=config.dof
    )
    return run_independence_mh(target, start, proposal, config, names)


def summarize(chain: Chain) -> PosteriorSummary:
    """Sample mean/SD per parameter and the mean of alpha+beta over draws."""
    draws = chain.draws
    if draws.shape[0] == 0:
        raise ValueError("empty chain")
    names = list(chain.parameter_names)
    means = draws.mean(axis=0)
    sds = draws.std(axis=0, ddof=1) if draws.shape[0] > 1 else np.zeros(draws.shape[1])
    ia, ib = names.index("alpha"), names.index("beta")
    return PosteriorSummary(
        parameter_names=names,
        mean={name: float(means[i]) for i, name in enumerate(names)},
        sd={name: float(sds[i]) for i, name in enumerate(names)},
        persistence_mean=float(np.mean(draws[:, ia] + draws[:, ib])),
        acceptance_rate=chain.acceptance_rate,
    )


def tau_int(trace: np.ndarray) -> float:
    """Integrated autocorrelation time of a 1-d trace.

    tau = 1/2 + sum_k rho(k) truncated at the smallest window W with
    W >= 5*tau(W); iid traces give ~0.5 (the convention floor).
    """
    x = np.asarray(trace, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("trace must be 1-d")
    n = x.size
    if n < 100:
        raise SamplerError(f"need at least 100 draws for tau_int, got {n}")
    x = x - x.mean()
    var0 = float(x @ x)
    if var0 == 0.0:
        raise SamplerError("zero-variance trace: tau_int undefined")
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, n=nfft)
    acov = np.fft.irfft(f * np.conj(f), n=nfft)[:n]
    rho = acov / acov[0]
    tau = 0.5
    for w in range(1, n):
        tau += float(rho[w])
        if w >= 5.0 * tau:
            break
    return max(tau, 0.5)


def integrated_autocorrelation_time(chain: Chain, parameter_index: int) -> float:
    """tau_int of one parameter trace of a chain."""
    return tau_int(chain.draws[:, parameter_index])


def export_chain_csv(chain: Chain, path: str | Path) -> None:
    """Write retained draws as CSV: draw index, parameters, log-posterior.

    Floats are written with repr (shortest round-trip form), so identical
    chains export byte-identically.
    """
    p = Path(path)
    with p.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["draw", *chain.parameter_names, "log_posterior"])
        for i in range(chain.draws.shape[0]):
            writer.writerow(
                [
                    i,
                    *(repr(float(v)) for v in chain.draws[i]),
                    repr(float(chain.log_posteriors[i])),
                ]
            )

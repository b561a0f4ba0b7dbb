"""Full-study orchestration: correlations plus three fits per instrument.

For every instrument the study runs up to three model fits (no exogenous
series, +volume, +transactions), skipping modes whose column is absent and
isolating per-fit failures to their own report cell. Per-fit seeds derive
deterministically from (base seed, instrument, mode), so a report's
provenance block is enough to reproduce the run bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from typing import Mapping

from .garch import ModelSpec
from .mcmc import (
    Chain,
    ChainConfig,
    PosteriorSummary,
    SamplerError,
    run_chain,
    summarize,
    tau_int,
)
from .timeseries import (
    DataError,
    PriceSeries,
    build_return_series,
    compute_log_returns,
    pearson_correlation,
)

MODES = ("none", "volume", "transactions")


@dataclass(frozen=True)
class FitResult:
    """One (instrument, exogenous-mode) cell: a summary or a skip/failure notice."""

    mode: str
    seed: int
    summary: PosteriorSummary | None
    tau: dict[str, float] | None
    notice: str | None = None


@dataclass(frozen=True)
class InstrumentReport:
    name: str
    correlations: dict[str, float]
    fits: list[FitResult]


@dataclass(frozen=True)
class StudyReport:
    instruments: list[InstrumentReport]
    config: ChainConfig
    data_fingerprints: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "data_fingerprints": dict(self.data_fingerprints),
            "instruments": [
                {
                    "name": inst.name,
                    "correlations": dict(inst.correlations),
                    "fits": [
                        {
                            "mode": fit.mode,
                            "seed": fit.seed,
                            "summary": None if fit.summary is None else asdict(fit.summary),
                            "tau": fit.tau,
                            "notice": fit.notice,
                        }
                        for fit in inst.fits
                    ],
                }
                for inst in self.instruments
            ],
        }

    @staticmethod
    def from_dict(doc: dict) -> "StudyReport":
        instruments = [
            InstrumentReport(
                name=inst["name"],
                correlations=dict(inst["correlations"]),
                fits=[
                    FitResult(
                        mode=fit["mode"],
                        seed=fit["seed"],
                        summary=None
                        if fit["summary"] is None
                        else PosteriorSummary(**fit["summary"]),
                        tau=fit["tau"],
                        notice=fit["notice"],
                    )
                    for fit in inst["fits"]
                ],
            )
            for inst in doc["instruments"]
        ]
        return StudyReport(
            instruments=instruments,
            config=ChainConfig(**doc["config"]),
            data_fingerprints=dict(doc["data_fingerprints"]),
        )


def fingerprint(prices: PriceSeries) -> str:
    """sha256 over the raw observations; identifies the dataset in provenance."""
    h = hashlib.sha256()
    h.update("|".join(d.isoformat() for d in prices.dates).encode())
    h.update(prices.closes.tobytes())
    for col in (prices.volumes, prices.transactions):
        h.update(b"|" + (col.tobytes() if col is not None else b"absent"))
    return h.hexdigest()


def derive_seed(base_seed: int, instrument: str, mode: str) -> int:
    """Deterministic, collision-resistant per-fit seed."""
    digest = hashlib.sha256(f"{base_seed}|{instrument}|{mode}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _correlations(prices: PriceSeries) -> dict[str, float]:
    returns = compute_log_returns(prices).returns
    pairs = {
        "returns-volume": (returns, None if prices.volumes is None else prices.volumes[1:]),
        "returns-transactions": (
            returns,
            None if prices.transactions is None else prices.transactions[1:],
        ),
        "volume-transactions": (prices.volumes, prices.transactions),
    }
    out: dict[str, float] = {}
    for key, (x, y) in pairs.items():
        if x is None or y is None:
            continue
        try:
            out[key] = pearson_correlation(x, y)
        except DataError:
            continue  # degenerate column: omit the pair, do not fail the study
    return out


def _fit_one(name: str, prices: PriceSeries, mode: str, config: ChainConfig) -> FitResult:
    seed = derive_seed(config.seed, name, mode)
    column = prices.volumes if mode == "volume" else prices.transactions
    if mode != "none" and column is None:
        return FitResult(mode, seed, None, None, f"{mode} column absent; fit skipped")
    try:
        data = build_return_series(prices, mode)
        chain = run_chain(data, ModelSpec(exogenous_mode=mode), replace(config, seed=seed))
        summary = summarize(chain)
        tau = _tau_block(chain)
    except (DataError, SamplerError, ValueError, FloatingPointError) as exc:
        return FitResult(mode, seed, None, None, f"fit failed: {exc}")
    return FitResult(mode, seed, summary, tau, None)


def _tau_block(chain: Chain) -> dict[str, float] | None:
    if chain.draws.shape[0] < 100:
        return None
    return {
        name: tau_int(chain.draws[:, i])
        for i, name in enumerate(chain.parameter_names)
    }


def run_study(instruments: Mapping[str, PriceSeries], config: ChainConfig) -> StudyReport:
    """Correlation block plus one fit per available exogenous mode, per instrument."""
    reports = []
    fingerprints = {}
    for name, prices in instruments.items():
        fingerprints[name] = fingerprint(prices)
        reports.append(
            InstrumentReport(
                name=name,
                correlations=_correlations(prices),
                fits=[_fit_one(name, prices, mode, config) for mode in MODES],
            )
        )
    return StudyReport(instruments=reports, config=config, data_fingerprints=fingerprints)


# -- rendering ---------------------------------------------------------------

_MODE_TITLES = {
    "none": "no exogenous series",
    "volume": "trading volume",
    "transactions": "number of transactions",
}


def _sig3(x: float) -> str:
    """Three significant figures, the table display precision."""
    return f"{x:.3g}"


def _table(headers: list[str], rows: list[list[str]], first_width: int) -> list[str]:
    widths = [first_width] + [max(10, len(h)) for h in headers[1:]]
    lines = []
    for row in [headers] + rows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append(("  " + "  ".join(cells)).rstrip())
    return lines


def _name_width(report: StudyReport) -> int:
    names = [inst.name for inst in report.instruments]
    return max([len("instrument"), 4, *(len(n) for n in names)] if names else [10])


def render_report(report: StudyReport, fmt: str = "table") -> str:
    """Render a study report: "table" (text) or "json" (machine-readable)."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")

    cfg = report.config
    width = _name_width(report)
    out: list[str] = []
    out.append("Bayesian GARCH study report")
    out.append("===========================")
    out.append("")
    out.append(
        f"protocol: burn-in {cfg.burn_in}, samples {cfg.samples}, base seed {cfg.seed}, "
        f"proposal dof {cfg.dof:g}, scale inflation {cfg.scale_inflation:g}, "
        f"adapt interval {cfg.adapt_interval}"
    )
    out.append("")
    out.append("data fingerprints:")
    for name, fp in report.data_fingerprints.items():
        out.append(f"  {name}: {fp}")
    out.append("")

    out.append("correlations:")
    corr_headers = ["instrument", "returns-volume", "returns-transactions", "volume-transactions"]
    corr_rows = []
    for inst in report.instruments:
        corr_rows.append(
            [inst.name]
            + [
                f"{inst.correlations[key]:.2f}" if key in inst.correlations else "n/a"
                for key in corr_headers[1:]
            ]
        )
    out.extend(_table(corr_headers, corr_rows, width))
    out.append("")

    for mode in MODES:
        out.append(f"fit: {_MODE_TITLES[mode]}")
        has_gamma = mode != "none"
        headers = ["instrument", "omega", "alpha", "beta"]
        if has_gamma:
            headers.append("gamma")
        headers.append("alpha+beta")
        rows: list[list[str]] = []
        notices: list[str] = []
        for inst in report.instruments:
            fit = next((f for f in inst.fits if f.mode == mode), None)
            if fit is None:
                continue
            if fit.summary is None:
                notices.append(f"  {inst.name}: [{fit.notice}]")
                continue
            s = fit.summary
            est = [inst.name] + [_sig3(s.mean[p]) for p in headers[1:-1]]
            est.append(_sig3(s.persistence_mean))
            sd_row = ["  SD"] + [_sig3(s.sd[p]) for p in headers[1:-1]] + [""]
            rows.append(est)
            rows.append(sd_row)
        out.extend(_table(headers, rows, width))
        out.extend(notices)
        out.append("")

    out.append("diagnostics:")
    for inst in report.instruments:
        for fit in inst.fits:
            if fit.summary is None:
                continue
            taus = (
                " ".join(f"{k}={v:.1f}" for k, v in fit.tau.items())
                if fit.tau
                else "n/a"
            )
            out.append(
                f"  {inst.name} [{fit.mode}] seed {fit.seed}: "
                f"acceptance {fit.summary.acceptance_rate:.3f}, tau_int {taus}"
            )
    out.append("")
    return "\n".join(out)


def parse_report(document: str) -> StudyReport:
    """Inverse of render_report(fmt="json")."""
    return StudyReport.from_dict(json.loads(document))

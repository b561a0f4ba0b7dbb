"""Command-line entry points: fit, study, simulate, corr.

Every subcommand is a thin adapter over the library; all randomness is
governed by --seed, so repeated invocations with identical flags produce
byte-identical output. Exit codes: 0 success, 1 usage error, 2 data error,
3 numeric/sampler error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .garch import GarchParams, ModelSpec, simulate
from .mcmc import (
    ChainConfig,
    SamplerError,
    export_chain_csv,
    run_chain,
    summarize,
    tau_int,
)
from .study import render_report, run_study
from .timeseries import (
    ColumnMap,
    DataError,
    build_return_series,
    load_csv,
    normalize_by_mean,
    pearson_correlation,
    prices_from_returns,
)


def _add_column_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--date-col", default="date", help="date column name (ISO yyyy-mm-dd; default: date)")
    p.add_argument("--close-col", default="close", help="closing price column name (default: close)")
    p.add_argument("--volume-col", default=None,
                   help="trading volume column name (default: 'volume' if present)")
    p.add_argument("--tx-col", default=None,
                   help="transaction count column name (default: 'transactions' if present)")


def _add_chain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--burnin", type=int, default=5000,
                   help="burn-in steps discarded before measurement (protocol default: 5000)")
    p.add_argument("--samples", type=int, default=50000,
                   help="retained post-burn-in states (protocol default: 50000)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--dof", type=float, default=10.0,
                   help="Student-t proposal degrees of freedom (default: 10)")
    p.add_argument("--inflation", type=float, default=1.2,
                   help="proposal scale inflation factor (default: 1.2)")
    p.add_argument("--adapt-interval", type=int, default=500,
                   help="burn-in steps between proposal refits (default: 500)")


def _read_header(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            header = next(csv.reader(f), None)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    if header is None:
        raise DataError(f"{path}: empty file (header row required)")
    return [h.strip() for h in header]


def _resolve_columns(path: str, args: argparse.Namespace) -> ColumnMap:
    """Explicit column flags are required to exist; defaults are auto-detected."""
    header = _read_header(path)
    volume = args.volume_col if args.volume_col is not None else ("volume" if "volume" in header else None)
    tx = args.tx_col if args.tx_col is not None else ("transactions" if "transactions" in header else None)
    return ColumnMap(date=args.date_col, close=args.close_col, volume=volume, transactions=tx)


def _chain_config(args: argparse.Namespace) -> ChainConfig:
    return ChainConfig(
        burn_in=args.burnin,
        samples=args.samples,
        seed=args.seed,
        dof=args.dof,
        adapt_interval=args.adapt_interval,
        scale_inflation=args.inflation,
    )


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _cmd_fit(args: argparse.Namespace) -> int:
    prices = load_csv(args.data, _resolve_columns(args.data, args))
    data = build_return_series(prices, args.exo)
    chain = run_chain(data, ModelSpec(exogenous_mode=args.exo), _chain_config(args))
    summary = summarize(chain)
    taus = (
        {name: tau_int(chain.draws[:, i]) for i, name in enumerate(chain.parameter_names)}
        if chain.draws.shape[0] >= 100
        else None
    )
    if args.chain_out:
        export_chain_csv(chain, args.chain_out)
    if args.format == "json":
        doc = {
            "exogenous_mode": args.exo,
            "n_returns": len(data),
            "summary": asdict(summary),
            "tau_int": taus,
            "config": asdict(chain.config),
        }
        _write_out(json.dumps(doc, indent=2) + "\n", args.out)
        return 0
    lines = [f"fit: {args.exo} ({len(data)} returns, seed {args.seed})"]
    lines.append(f"{'parameter':<12}{'mean':>14}{'sd':>14}")
    for name in summary.parameter_names:
        lines.append(f"{name:<12}{summary.mean[name]:>14.6g}{summary.sd[name]:>14.6g}")
    lines.append(f"persistence (alpha+beta) mean: {summary.persistence_mean:.6g}")
    lines.append(f"acceptance rate: {summary.acceptance_rate:.3f}")
    if taus is not None:
        lines.append("tau_int: " + " ".join(f"{k}={v:.1f}" for k, v in taus.items()))
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_study(args: argparse.Namespace) -> int:
    instruments = {}
    for path in args.data:
        name = Path(path).stem
        instruments[name] = load_csv(path, _resolve_columns(path, args))
    report = run_study(instruments, _chain_config(args))
    if args.json_out:
        Path(args.json_out).write_text(render_report(report, "json"), encoding="utf-8")
    _write_out(render_report(report, args.format), args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = GarchParams(args.omega, args.alpha, args.beta, args.gamma)
    exo = None
    if args.gamma is not None:
        raw = np.abs(np.random.default_rng([args.seed, 1]).normal(1.0, args.exo_sd, args.length))
        exo = normalize_by_mean(raw)
    series = simulate(params, args.length, args.seed, exogenous=exo)
    start_date = dt.date(2000, 1, 3)
    closes = prices_from_returns(series.returns, start=100.0)
    rows = [["date", "close", "return_pct"] + (["exogenous"] if exo is not None else [])]
    for t in range(args.length + 1):
        row = [
            (start_date + dt.timedelta(days=t)).isoformat(),
            repr(float(closes[t])),
            "" if t == 0 else repr(float(series.returns[t - 1])),
        ]
        if exo is not None:
            row.append("1.0" if t == 0 else repr(float(exo[t - 1])))
        rows.append(row)
    text = "\n".join(",".join(r) for r in rows) + "\n"
    _write_out(text, args.out)
    return 0


def _cmd_corr(args: argparse.Namespace) -> int:
    prices = load_csv(args.data, _resolve_columns(args.data, args))
    returns = build_return_series(prices, "none").returns
    lines = []
    if prices.volumes is not None:
        lines.append(f"returns-volume: {pearson_correlation(returns, prices.volumes[1:]):.4f}")
    if prices.transactions is not None:
        lines.append(
            f"returns-transactions: {pearson_correlation(returns, prices.transactions[1:]):.4f}"
        )
    if prices.volumes is not None and prices.transactions is not None:
        lines.append(
            f"volume-transactions: {pearson_correlation(prices.volumes, prices.transactions):.4f}"
        )
    if not lines:
        lines.append("no volume or transactions column found; nothing to correlate")
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesgarch",
        description="Bayesian GARCH(1,1)/GARCH-X estimation by independence "
        "Metropolis-Hastings with a multivariate Student-t proposal.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_fit = sub.add_parser("fit", help="estimate one model on one dataset")
    p_fit.add_argument("--data", required=True, help="input CSV path")
    _add_column_flags(p_fit)
    p_fit.add_argument("--exo", choices=["none", "volume", "transactions"], default="none",
                       help="exogenous variance regressor (default: none)")
    _add_chain_flags(p_fit)
    p_fit.add_argument("--out", default=None, help="summary output path (default: stdout)")
    p_fit.add_argument("--chain-out", default=None, help="retained-draws CSV path")
    p_fit.add_argument("--format", choices=["table", "json"], default="table")
    p_fit.set_defaults(func=_cmd_fit)

    p_study = sub.add_parser(
        "study", help="correlations + plain/volume/transactions fits per instrument"
    )
    p_study.add_argument("--data", required=True, nargs="+",
                         help="input CSV path(s), one per instrument")
    _add_column_flags(p_study)
    _add_chain_flags(p_study)
    p_study.add_argument("--out", default=None, help="report output path (default: stdout)")
    p_study.add_argument("--json-out", default=None, help="machine-readable report path")
    p_study.add_argument("--format", choices=["table", "json"], default="table")
    p_study.set_defaults(func=_cmd_study)

    p_sim = sub.add_parser("simulate", help="generate a synthetic return/price CSV")
    p_sim.add_argument("--omega", type=float, required=True)
    p_sim.add_argument("--alpha", type=float, required=True)
    p_sim.add_argument("--beta", type=float, required=True)
    p_sim.add_argument("--gamma", type=float, default=None,
                       help="exogenous coefficient; adds a synthetic mean-1 exogenous column")
    p_sim.add_argument("--exo-sd", type=float, default=0.2,
                       help="sd of the synthetic exogenous |N(1, sd^2)| draw (default: 0.2)")
    p_sim.add_argument("--length", type=int, required=True, help="number of returns")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_corr = sub.add_parser("corr", help="descriptive correlations for one dataset")
    p_corr.add_argument("--data", required=True, help="input CSV path")
    _add_column_flags(p_corr)
    p_corr.add_argument("--out", default=None, help="output path (default: stdout)")
    p_corr.set_defaults(func=_cmd_corr)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (SamplerError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from bayesgarch.garch import GarchParams, simulate
from bayesgarch.mcmc import ChainConfig, PosteriorSummary
from bayesgarch.study import (
    FitResult,
    InstrumentReport,
    StudyReport,
    derive_seed,
    fingerprint,
    parse_report,
    render_report,
    run_study,
)
from bayesgarch.timeseries import PriceSeries, prices_from_returns

GOLDEN = Path(__file__).parent / "data" / "astellas_table.golden"

# small protocol so study tests stay fast; structure is what matters here
FAST = ChainConfig(burn_in=300, samples=400, seed=9, adapt_interval=100)


def synthetic_prices(seed=0, n=300, volumes=True, transactions=True):
    rets = simulate(GarchParams(0.1, 0.1, 0.8), n - 1, seed=seed)
    closes = prices_from_returns(rets.returns)
    rng = np.random.default_rng(seed + 1000)
    start = dt.date(2006, 6, 3)
    return PriceSeries(
        dates=tuple(start + dt.timedelta(days=i) for i in range(n)),
        closes=closes,
        volumes=rng.lognormal(10.0, 0.5, n) if volumes else None,
        transactions=rng.lognormal(6.0, 0.4, n) if transactions else None,
    )


def astellas_fixture():
    summary = PosteriorSummary(
        parameter_names=["omega", "alpha", "beta"],
        mean={"omega": 0.188, "alpha": 0.095, "beta": 0.857},
        sd={"omega": 0.066, "alpha": 0.018, "beta": 0.026},
        persistence_mean=0.952,
        acceptance_rate=0.75,
    )
    return StudyReport(
        instruments=[
            InstrumentReport(
                name="Astellas Pharma Inc.",
                correlations={},
                fits=[
                    FitResult("none", 12345, summary, None, None),
                    FitResult("volume", 12346, None, None, "volume column absent; fit skipped"),
                    FitResult(
                        "transactions", 12347, None, None,
                        "transactions column absent; fit skipped",
                    ),
                ],
            )
        ],
        config=ChainConfig(),
        data_fingerprints={"Astellas Pharma Inc.": "fixture"},
    )


class TestRunStudy:
    def test_full_instrument(self):
        report = run_study({"synth": synthetic_prices()}, FAST)
        assert len(report.instruments) == 1
        inst = report.instruments[0]
        assert set(inst.correlations) == {
            "returns-volume",
            "returns-transactions",
            "volume-transactions",
        }
        assert [f.mode for f in inst.fits] == ["none", "volume", "transactions"]
        assert all(f.summary is not None for f in inst.fits)
        gamma_fits = [f for f in inst.fits if f.mode != "none"]
        assert all("gamma" in f.summary.parameter_names for f in gamma_fits)
        assert "gamma" not in inst.fits[0].summary.parameter_names
        assert report.data_fingerprints["synth"] == fingerprint(synthetic_prices())

    def test_missing_transactions_skipped_with_notice(self):
        report = run_study(
            {"novol": synthetic_prices(transactions=False)}, FAST
        )
        fits = {f.mode: f for f in report.instruments[0].fits}
        assert fits["none"].summary is not None
        assert fits["volume"].summary is not None
        assert fits["transactions"].summary is None
        assert "absent" in fits["transactions"].notice
        assert "returns-transactions" not in report.instruments[0].correlations

    def test_failure_isolated_to_cell(self):
        # zero volume column: normalization fails for that fit only
        prices = synthetic_prices(transactions=True)
        broken = PriceSeries(
            dates=prices.dates,
            closes=prices.closes,
            volumes=np.zeros(len(prices)),
            transactions=prices.transactions,
        )
        report = run_study({"broken": broken}, FAST)
        fits = {f.mode: f for f in report.instruments[0].fits}
        assert fits["volume"].summary is None
        assert "fit failed" in fits["volume"].notice
        assert fits["none"].summary is not None
        assert fits["transactions"].summary is not None

    def test_reproducible(self):
        a = run_study({"synth": synthetic_prices()}, FAST)
        b = run_study({"synth": synthetic_prices()}, FAST)
        assert a == b

    def test_per_fit_seeds_distinct(self):
        seeds = {
            derive_seed(9, inst, mode)
            for inst in ("a", "b")
            for mode in ("none", "volume", "transactions")
        }
        assert len(seeds) == 6
        assert derive_seed(9, "a", "none") == derive_seed(9, "a", "none")
        assert derive_seed(9, "a", "none") != derive_seed(10, "a", "none")


class TestRender:
    def test_golden_table(self):
        text = render_report(astellas_fixture(), "table")
        assert text.encode("utf-8") == GOLDEN.read_bytes()

    def test_persistence_column_is_sum_of_rendered_alpha_beta(self):
        report = run_study({"synth": synthetic_prices()}, FAST)
        for inst in report.instruments:
            for fit in inst.fits:
                if fit.summary is None:
                    continue
                s = fit.summary
                # rounding of the 3-significant-digit display
                assert s.persistence_mean == pytest.approx(
                    s.mean["alpha"] + s.mean["beta"], abs=1e-12
                )

    def test_empty_report_headers_only(self):
        empty = StudyReport(instruments=[], config=ChainConfig(), data_fingerprints={})
        text = render_report(empty, "table")
        assert "Bayesian GARCH study report" in text
        assert "correlations:" in text
        assert "fit: no exogenous series" in text

    def test_json_round_trip(self):
        report = run_study(
            {"synth": synthetic_prices(), "novol": synthetic_prices(1, volumes=False)},
            FAST,
        )
        doc = render_report(report, "json")
        assert parse_report(doc) == report

    def test_fixture_round_trip(self):
        report = astellas_fixture()
        assert parse_report(render_report(report, "json")) == report

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="format"):
            render_report(astellas_fixture(), "yaml")

import csv
import datetime as dt
import json
import math

import numpy as np
import pytest

from bayesgarch.cli import main
from bayesgarch.garch import GarchParams, simulate
from bayesgarch.timeseries import prices_from_returns

FAST_FLAGS = ["--burnin", "200", "--samples", "300", "--adapt-interval", "100"]


def write_price_csv(path, n=250, seed=0, volume_name="volume", tx_name="transactions"):
    rets = simulate(GarchParams(0.1, 0.1, 0.8), n - 1, seed=seed)
    closes = prices_from_returns(rets.returns)
    rng = np.random.default_rng(seed + 500)
    start = dt.date(2006, 6, 3)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["date", "close", volume_name, tx_name])
        for i in range(n):
            w.writerow(
                [
                    (start + dt.timedelta(days=i)).isoformat(),
                    repr(float(closes[i])),
                    repr(float(rng.lognormal(10, 0.5))),
                    repr(float(rng.lognormal(6, 0.4))),
                ]
            )
    return path


@pytest.fixture
def price_csv(tmp_path):
    return write_price_csv(tmp_path / "prices.csv")


class TestFit:
    def test_deterministic_output(self, price_csv, capsys):
        argv = ["fit", "--data", str(price_csv), "--exo", "volume", "--seed", "7", *FAST_FLAGS]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second
        assert "gamma" in first
        assert "acceptance rate" in first

    def test_json_format(self, price_csv, capsys):
        argv = ["fit", "--data", str(price_csv), "--format", "json", "--seed", "3", *FAST_FLAGS]
        assert main(argv) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["exogenous_mode"] == "none"
        assert set(doc["summary"]["mean"]) == {"omega", "alpha", "beta"}
        assert doc["config"]["burn_in"] == 200

    def test_chain_export(self, price_csv, tmp_path, capsys):
        out = tmp_path / "chain.csv"
        argv = ["fit", "--data", str(price_csv), "--chain-out", str(out), *FAST_FLAGS]
        assert main(argv) == 0
        capsys.readouterr()
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "draw,omega,alpha,beta,log_posterior"
        assert len(lines) == 301

    def test_out_file(self, price_csv, tmp_path, capsys):
        out = tmp_path / "summary.txt"
        argv = ["fit", "--data", str(price_csv), "--out", str(out), *FAST_FLAGS]
        assert main(argv) == 0
        assert capsys.readouterr().out == ""
        assert "parameter" in out.read_text()

    def test_explicit_missing_column_is_data_error(self, price_csv, capsys):
        argv = ["fit", "--data", str(price_csv), "--volume-col", "vol", *FAST_FLAGS]
        assert main(argv) == 2
        assert "vol" in capsys.readouterr().err


class TestStudy:
    def test_end_to_end(self, tmp_path, capsys):
        a = write_price_csv(tmp_path / "alpha_corp.csv", seed=1)
        b = write_price_csv(tmp_path / "beta_corp.csv", seed=2)
        json_out = tmp_path / "report.json"
        argv = [
            "study", "--data", str(a), str(b),
            "--json-out", str(json_out), "--seed", "11", *FAST_FLAGS,
        ]
        assert main(argv) == 0
        text = capsys.readouterr().out
        assert "alpha_corp" in text and "beta_corp" in text
        assert "fit: trading volume" in text
        doc = json.loads(json_out.read_text())
        assert {inst["name"] for inst in doc["instruments"]} == {"alpha_corp", "beta_corp"}
        assert doc["config"]["seed"] == 11


class TestSimulate:
    def test_csv_shape_and_price_path(self, capsys):
        argv = [
            "simulate", "--omega", "0.1", "--alpha", "0.1", "--beta", "0.8",
            "--length", "3000", "--seed", "1",
        ]
        assert main(argv) == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert len(rows) == 3001
        assert float(rows[0]["close"]) == 100.0
        assert rows[0]["return_pct"] == ""
        closes = np.array([float(r["close"]) for r in rows])
        rets = np.array([float(r["return_pct"]) for r in rows[1:]])
        np.testing.assert_allclose(
            closes[1:], closes[:-1] * np.exp(rets / 100.0), rtol=1e-12
        )

    def test_deterministic(self, capsys):
        argv = ["simulate", "--omega", "0.1", "--alpha", "0.1", "--beta", "0.8",
                "--length", "50", "--seed", "9"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_gamma_adds_exogenous_column(self, capsys):
        argv = ["simulate", "--omega", "0.1", "--alpha", "0.1", "--beta", "0.7",
                "--gamma", "0.3", "--length", "40", "--seed", "2"]
        assert main(argv) == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        exo = np.array([float(r["exogenous"]) for r in rows[1:]])
        assert abs(exo.mean() - 1.0) < 1e-12

    def test_roundtrip_into_fit(self, tmp_path, capsys):
        sim_csv = tmp_path / "sim.csv"
        assert main(["simulate", "--omega", "0.1", "--alpha", "0.1", "--beta", "0.8",
                     "--length", "250", "--seed", "4", "--out", str(sim_csv)]) == 0
        assert main(["fit", "--data", str(sim_csv), *FAST_FLAGS]) == 0
        assert "parameter" in capsys.readouterr().out

    def test_invalid_params_numeric_error(self, capsys):
        argv = ["simulate", "--omega", "-1", "--alpha", "0.1", "--beta", "0.8",
                "--length", "10"]
        assert main(argv) == 3
        assert "omega" in capsys.readouterr().err


class TestCorr:
    def test_identical_columns_give_unit_correlation(self, tmp_path, capsys):
        p = tmp_path / "same.csv"
        rng = np.random.default_rng(5)
        with open(p, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["date", "close", "volume", "transactions"])
            start = dt.date(2020, 1, 1)
            for i in range(50):
                v = rng.lognormal(8, 0.5)
                w.writerow([(start + dt.timedelta(days=i)).isoformat(),
                            repr(100.0 + i + rng.uniform()), repr(v), repr(v)])
        assert main(["corr", "--data", str(p)]) == 0
        out = capsys.readouterr().out
        assert "volume-transactions: 1.0000" in out

    def test_no_exogenous_columns(self, tmp_path, capsys):
        p = tmp_path / "bare.csv"
        p.write_text("date,close\n2020-01-01,100\n2020-01-02,101\n")
        assert main(["corr", "--data", str(p)]) == 0
        assert "nothing to correlate" in capsys.readouterr().out


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert main(["fit"]) == 1  # missing required --data
        assert main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_help_is_0(self, capsys):
        assert main(["--help"]) == 0
        assert "fit" in capsys.readouterr().out

    def test_missing_file_is_2(self, capsys):
        assert main(["fit", "--data", "/nonexistent/x.csv"]) == 2
        capsys.readouterr()

    def test_bad_data_is_2(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("date,close\n2020-01-01,100\n2020-01-02,0\n")
        assert main(["fit", "--data", str(p), *FAST_FLAGS]) == 2
        assert "row 2" in capsys.readouterr().err

    def test_defaults_documented_in_help(self, capsys):
        with pytest.raises(SystemExit):
            from bayesgarch.cli import build_parser

            build_parser().parse_args(["fit", "--help"])
        text = capsys.readouterr().out
        assert "5000" in text and "50000" in text

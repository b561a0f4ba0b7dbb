"""Daily price ingestion, log-returns, and exogenous-series preparation.

CSV input: header row required, comma delimited, UTF-8. Column names for
date (ISO yyyy-mm-dd), close, volume and transactions are configurable via
a ColumnMap. Volume and transaction columns are individually optional;
when mapped, missing cells are hard errors (no imputation).

Normalization of exogenous series uses the full-sample arithmetic mean.
This is an in-sample design: the normalized series look ahead, so fitted
models are not suitable for out-of-sample prediction as-is.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EXOGENOUS_LABELS = ("none", "volume", "transactions")


class DataError(ValueError):
    """Raised for unusable input data (parse failures, invariant violations)."""


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PriceSeries:
    """Daily observations: strictly increasing dates, positive closes.

    volumes/transactions are optional per-day non-negative series of the
    same length as dates.
    """

    dates: tuple[dt.date, ...]
    closes: np.ndarray
    volumes: np.ndarray | None = None
    transactions: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", _readonly(self.closes))
        n = len(self.dates)
        if len(self.closes) != n:
            raise DataError(f"closes has length {len(self.closes)}, expected {n}")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise DataError(f"dates not strictly increasing at {cur.isoformat()}")
        if not np.all(np.isfinite(self.closes)) or np.any(self.closes <= 0.0):
            raise DataError("all closing prices must be finite and > 0")
        for field in ("volumes", "transactions"):
            col = getattr(self, field)
            if col is None:
                continue
            col = _readonly(col)
            object.__setattr__(self, field, col)
            if len(col) != n:
                raise DataError(f"{field} has length {len(col)}, expected {n}")
            if not np.all(np.isfinite(col)) or np.any(col < 0.0):
                raise DataError(f"{field} must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSeries:
    """Percent log-returns, optionally paired with a mean-1 exogenous series.

    returns[t] covers the day of prices[t+1]; if exogenous is present it is
    aligned to the same days and already normalized (sample mean 1 within
    1e-12).
    """

    returns: np.ndarray
    exogenous: np.ndarray | None = None
    label: str = "none"

    def __post_init__(self) -> None:
        object.__setattr__(self, "returns", _readonly(self.returns))
        if not np.all(np.isfinite(self.returns)):
            raise DataError("returns must be finite")
        if self.label not in EXOGENOUS_LABELS:
            raise DataError(f"unknown exogenous label {self.label!r}")
        if (self.exogenous is None) != (self.label == "none"):
            raise DataError("exogenous series and label must be set together")
        if self.exogenous is not None:
            exo = _readonly(self.exogenous)
            object.__setattr__(self, "exogenous", exo)
            if len(exo) != len(self.returns):
                raise DataError(
                    f"exogenous has length {len(exo)}, expected {len(self.returns)}"
                )
            if np.any(exo < 0.0):
                raise DataError("exogenous values must be non-negative")
            if abs(float(np.mean(exo)) - 1.0) > 1e-12:
                raise DataError("exogenous series must be normalized to mean 1")

    def __len__(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class ColumnMap:
    """CSV column names per role. volume/transactions map to None when absent."""

    date: str = "date"
    close: str = "close"
    volume: str | None = None
    transactions: str | None = None


def load_csv(path: str | Path, columns: ColumnMap | None = None) -> PriceSeries:
    """Read a daily price CSV into a validated PriceSeries.

    Rows with a missing or unparseable mapped cell are errors (reported with
    their 1-based data row number), never skipped.
    """
    columns = columns or ColumnMap()
    p = Path(path)
    try:
        f = p.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {p}: {exc}") from exc
    with f:
        reader = csv.DictReader(f)
        header = reader.fieldnames
        if header is None:
            raise DataError(f"{p}: empty file (header row required)")
        mapped = {"date": columns.date, "close": columns.close}
        if columns.volume is not None:
            mapped["volume"] = columns.volume
        if columns.transactions is not None:
            mapped["transactions"] = columns.transactions
        missing = [name for name in mapped.values() if name not in header]
        if missing:
            raise DataError(f"{p}: missing column(s) {', '.join(missing)}")

        dates: list[dt.date] = []
        values: dict[str, list[float]] = {role: [] for role in mapped if role != "date"}
        for i, row in enumerate(reader, start=1):
            raw_date = (row.get(mapped["date"]) or "").strip()
            try:
                dates.append(dt.date.fromisoformat(raw_date))
            except ValueError as exc:
                raise DataError(f"{p}: row {i}: bad date {raw_date!r}") from exc
            for role, name in mapped.items():
                if role == "date":
                    continue
                cell = (row.get(name) or "").strip()
                if not cell:
                    raise DataError(f"{p}: row {i}: missing {role} value")
                try:
                    values[role].append(float(cell))
                except ValueError as exc:
                    raise DataError(f"{p}: row {i}: bad {role} value {cell!r}") from exc

    if not dates:
        raise DataError(f"{p}: no data rows")
    closes = np.array(values["close"])
    bad = np.nonzero(~(np.isfinite(closes) & (closes > 0.0)))[0]
    if bad.size:
        raise DataError(f"{p}: row {bad[0] + 1}: non-positive close {closes[bad[0]]}")
    for prev_i in range(1, len(dates)):
        if dates[prev_i] <= dates[prev_i - 1]:
            raise DataError(
                f"{p}: row {prev_i + 1}: date {dates[prev_i].isoformat()} not after previous row"
            )
    return PriceSeries(
        dates=tuple(dates),
        closes=closes,
        volumes=np.array(values["volume"]) if "volume" in values else None,
        transactions=np.array(values["transactions"]) if "transactions" in values else None,
    )


def compute_log_returns(prices: PriceSeries) -> ReturnSeries:
    """Percent log-returns: returns[t] = 100*(ln closes[t+1] - ln closes[t])."""
    if len(prices) < 2:
        raise DataError("need at least 2 prices to compute returns")
    logp = np.log(prices.closes)
    return ReturnSeries(returns=100.0 * np.diff(logp))


def prices_from_returns(returns: np.ndarray, start: float = 100.0) -> np.ndarray:
    """Price path implied by percent log-returns; inverse of compute_log_returns.

    Returns len(returns)+1 closes beginning at `start`.
    """
    if start <= 0.0:
        raise DataError("start price must be > 0")
    returns = np.asarray(returns, dtype=np.float64)
    return start * np.exp(np.concatenate([[0.0], np.cumsum(returns / 100.0)]))


def normalize_by_mean(values: np.ndarray) -> np.ndarray:
    """Divide a non-negative series by its arithmetic mean (result has mean 1)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise DataError("cannot normalize an empty series")
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise DataError("series must be finite and non-negative")
    mean = float(np.mean(values))
    if mean <= 0.0:
        raise DataError("cannot normalize: series mean is zero")
    return values / mean


def align_exogenous(
    returns: ReturnSeries, raw_exogenous: np.ndarray, label: str
) -> ReturnSeries:
    """Attach an exogenous series sampled on all T price dates to the returns.

    The first date has no return, so its exogenous observation is dropped;
    the remaining T-1 values are mean-normalized. The in-model series thus
    has mean exactly 1.
    """
    raw = np.asarray(raw_exogenous, dtype=np.float64)
    if len(raw) != len(returns) + 1:
        raise DataError(
            f"exogenous series has length {len(raw)}, expected {len(returns) + 1}"
        )
    return ReturnSeries(
        returns=returns.returns,
        exogenous=normalize_by_mean(raw[1:]),
        label=label,
    )


def build_return_series(prices: PriceSeries, mode: str) -> ReturnSeries:
    """Returns plus the requested exogenous series ("none"|"volume"|"transactions")."""
    rets = compute_log_returns(prices)
    if mode == "none":
        return rets
    if mode == "volume":
        raw = prices.volumes
    elif mode == "transactions":
        raw = prices.transactions
    else:
        raise DataError(f"unknown exogenous mode {mode!r}")
    if raw is None:
        raise DataError(f"price series has no {mode} column")
    return align_exogenous(rets, raw, mode)


def pearson_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson product-moment correlation of two equal-length series."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("inputs must be 1-d series of equal length")
    if len(x) < 2:
        raise DataError("need at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DataError("correlation undefined for zero-variance input")
    return float(dx @ dy) / float(np.sqrt(sxx * syy))

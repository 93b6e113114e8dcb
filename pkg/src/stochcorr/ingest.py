"""Price and return files, synthetic data and result serialization.

File layout for prices and returns: a header row ``date,TICKER1,...``, then
one row per trading day with an ISO-8601 date. Lines starting with ``#``
are provenance comments and are skipped. Empty cells and ``nan``/``NA``
mark missing values; tickers with any missing value are dropped with a
warning.
"""

import csv
import datetime as _dt
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .ensemble import EnsembleSpec, sample_mixture_return
from .errors import DataFormatError

_MISSING = {"", "nan", "na", "n/a", "null"}
_FLOAT_FMT = "%.17g"
SYNTHETIC_START = "2000-01-03"


@dataclass(frozen=True)
class PriceMatrix:
    tickers: tuple
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        d = np.asarray(self.dates, dtype="datetime64[D]")
        tickers = tuple(self.tickers)
        if p.ndim != 2 or p.shape != (len(tickers), d.size):
            raise ValueError(f"prices shape {p.shape} does not match {len(tickers)} tickers x {d.size} dates")
        if np.any(np.diff(d) <= np.timedelta64(0, "D")):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ValueError("prices must be finite and positive")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "prices", p)

    @property
    def k(self) -> int:
        return len(self.tickers)


@dataclass(frozen=True)
class ReturnMatrix:
    tickers: tuple
    values: np.ndarray
    interval: int = 1
    dates: np.ndarray = None

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        tickers = tuple(self.tickers)
        if v.shape[0] != len(tickers):
            raise ValueError(f"{v.shape[0]} return rows for {len(tickers)} tickers")
        if not np.all(np.isfinite(v)):
            raise ValueError("returns must be finite")
        if int(self.interval) != self.interval or self.interval < 1:
            raise ValueError("interval must be a positive integer")
        if self.dates is not None:
            d = np.asarray(self.dates, dtype="datetime64[D]")
            if d.size != v.shape[1]:
                raise ValueError("one date per return column required")
            object.__setattr__(self, "dates", d)
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "interval", int(self.interval))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def t(self) -> int:
        return self.values.shape[1]


def _read_table(path):
    """Parse a date-by-ticker CSV into (tickers, dates, K x T values with NaN for missing)."""
    with open(path, newline="") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1)
                 if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise DataFormatError("file is empty")
    rows = csv.reader([line for _, line in lines])
    header = next(rows)
    head_no = lines[0][0]
    if len(header) < 2 or header[0].strip().lower() != "date":
        raise DataFormatError("header must be 'date,TICKER1,...'", head_no)
    tickers = [h.strip() for h in header[1:]]
    if any(not t for t in tickers) or len(set(tickers)) != len(tickers):
        raise DataFormatError("ticker labels must be non-empty and unique", head_no)
    dates, values = [], []
    for (lineno, _), row in zip(lines[1:], rows):
        if len(row) != len(header):
            raise DataFormatError(f"expected {len(header)} columns, found {len(row)}", lineno)
        try:
            day = _dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise DataFormatError(f"invalid ISO date {row[0]!r}", lineno) from None
        if dates and day <= dates[-1]:
            raise DataFormatError(f"date {day} is not after {dates[-1]}", lineno)
        vals = []
        for col, cell in zip(tickers, row[1:]):
            cell = cell.strip()
            if cell.lower() in _MISSING:
                vals.append(math.nan)
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataFormatError(f"non-numeric value {cell!r} for {col}", lineno) from None
        dates.append(day)
        values.append(vals)
    if not dates:
        raise DataFormatError("file has a header but no data rows")
    return tickers, np.array(dates, dtype="datetime64[D]"), np.array(values, dtype=float).T


def _drop_incomplete(tickers, values):
    complete = ~np.any(np.isnan(values), axis=1)
    dropped = [t for t, ok in zip(tickers, complete) if not ok]
    if dropped:
        warnings.warn(f"dropping {len(dropped)} ticker(s) with missing values: {', '.join(dropped)}",
                      stacklevel=3)
    if not np.any(complete):
        raise DataFormatError("no ticker has a complete series")
    return tuple(t for t, ok in zip(tickers, complete) if ok), values[complete]


def load_prices(path) -> PriceMatrix:
    """Read a price CSV; incomplete tickers are dropped with a warning."""
    tickers, dates, values = _read_table(path)
    tickers, values = _drop_incomplete(tickers, values)
    bad = np.argwhere(~np.isfinite(values) | (values <= 0))
    if bad.size:
        i, j = bad[0]
        raise DataFormatError(f"price for {tickers[i]} on {dates[j]} must be positive and finite")
    return PriceMatrix(tickers, dates, values)


def load_returns(path, interval: int = 1) -> ReturnMatrix:
    """Read a returns CSV (same layout as prices, values are returns)."""
    tickers, dates, values = _read_table(path)
    tickers, values = _drop_incomplete(tickers, values)
    if not np.all(np.isfinite(values)):
        raise DataFormatError("returns must be finite")
    return ReturnMatrix(tickers, values, interval, dates)


def compute_returns(prices: PriceMatrix, dt: int = 1) -> ReturnMatrix:
    """Simple returns over non-overlapping windows starting at t = 0, dt, 2 dt, ...

    The result has ``floor((T - 1) / dt)`` columns, dated at the window ends.
    """
    if int(dt) != dt or dt < 1:
        raise ValueError("dt must be a positive integer")
    dt = int(dt)
    t = prices.prices.shape[1]
    if dt >= t:
        raise ValueError(f"dt={dt} needs more than {t} price observations")
    idx = np.arange(0, t, dt)
    s = prices.prices[:, idx]
    r = (s[:, 1:] - s[:, :-1]) / s[:, :-1]
    return ReturnMatrix(prices.tickers, r, dt, prices.dates[idx[1:]])


def synthetic_tickers(k: int) -> tuple:
    width = len(str(k - 1))
    return tuple(f"S{i:0{width}d}" for i in range(k))


def generate_synthetic(spec: EnsembleSpec, t: int, rng, start=SYNTHETIC_START) -> ReturnMatrix:
    """``t`` independent daily return vectors drawn from the averaged distribution."""
    if t < 1:
        raise ValueError("t must be positive")
    x = sample_mixture_return(spec, rng, size=int(t))
    dates = np.busday_offset(np.datetime64(start, "D"), np.arange(t), roll="forward")
    return ReturnMatrix(synthetic_tickers(spec.k), x.T, 1, dates)


def provenance(seed=None, config=None) -> dict:
    return {"tool": "stochcorr", "version": __version__, "seed": seed, "config": config or {}}


def _comment_lines(header) -> list:
    if header is None:
        return []
    if isinstance(header, dict):
        return ["# " + json.dumps(header, sort_keys=True, default=_json_default)]
    return [f"# {line}" for line in header]


def write_table(path, columns, rows, header=None):
    """CSV with optional ``#`` provenance lines; floats keep full precision."""
    with open(path, "w", newline="") as fh:
        for line in _comment_lines(header):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_FLOAT_FMT % v if isinstance(v, (float, np.floating)) else v for v in row])


def write_returns(returns: ReturnMatrix, path, header=None):
    dates = returns.dates
    if dates is None:
        dates = np.busday_offset(np.datetime64(SYNTHETIC_START, "D"), np.arange(returns.t))
    rows = ([str(d)] + list(col) for d, col in zip(dates, returns.values.T))
    write_table(path, ["date", *returns.tickers], rows, header)


def histogram(samples, bins=100, value_range=None):
    """Counts and density-normalized heights; returns (centers, counts, density)."""
    y = np.asarray(samples, dtype=float).ravel()
    if y.size == 0:
        raise ValueError("no samples")
    counts, edges = np.histogram(y, bins=bins, range=value_range)
    total = counts.sum()
    if total == 0:
        raise ValueError("no samples fall inside the histogram range")
    density = counts / (total * np.diff(edges))
    return 0.5 * (edges[1:] + edges[:-1]), counts, density


def write_histogram(samples, path, bins=100, value_range=None, header=None):
    """Histogram CSV ``bin_center,count,density``; density integrates to one over the bins."""
    centers, counts, density = histogram(samples, bins, value_range)
    write_table(path, ["bin_center", "count", "density"],
                zip(centers.tolist(), counts.tolist(), density.tolist()), header)
    return centers, counts, density


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def result_record(result, alpha=None, seed=None, config=None, extra=None) -> dict:
    """JSON-ready record for a fit result (a ``FitResult`` or a mapping)."""
    res = result.to_dict() if hasattr(result, "to_dict") else dict(result)
    record = {
        "method": res.get("method"),
        "n_hat": res.get("n_hat"),
        "alpha": alpha,
        "objective": res.get("objective"),
        "seed": seed,
        "config": config if config is not None else res.get("config"),
        "sample_count": res.get("sample_count"),
        "diagnostics": {k: res[k] for k in ("ks_distance", "iterations", "boundary") if k in res},
        "provenance": {"tool": "stochcorr", "version": __version__},
    }
    if extra:
        record.update(extra)
    # normalize through JSON so the in-memory record equals its reparsed file
    return json.loads(json.dumps(record, default=_json_default))


def write_results(record, path):
    """Write a result record (see :func:`result_record`) as sorted, indented JSON."""
    if not isinstance(record, dict):
        record = result_record(record)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
        fh.write("\n")


def read_results(path) -> dict:
    with open(path) as fh:
        return json.load(fh)

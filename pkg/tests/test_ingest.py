import json
import warnings

import numpy as np
import pytest

from stochcorr.ensemble import EnsembleSpec
from stochcorr.errors import DataFormatError
from stochcorr.fit import fit_n_min_dist
from stochcorr.ingest import (PriceMatrix, ReturnMatrix, compute_returns, generate_synthetic, histogram,
                              load_prices, load_returns, read_results, result_record, write_histogram,
                              write_results, write_returns)
from stochcorr.linalg import CovarianceModel, sample_covariance
from stochcorr.rng import RngStream

GOOD = """date,AAA,BBB,CCC
2024-01-02,100,50,10
2024-01-03,110,51,10
2024-01-04,121,49,10
2024-01-05,100,50,10
2024-01-08,105,52,10
"""


def write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_good_file(tmp_path):
    pm = load_prices(write(tmp_path, GOOD))
    assert pm.tickers == ("AAA", "BBB", "CCC") and pm.prices.shape == (3, 5)
    assert pm.dates[0] == np.datetime64("2024-01-02")


def test_missing_cell_drops_ticker(tmp_path):
    text = GOOD.replace("2024-01-04,121,49,10", "2024-01-04,121,,10")
    with pytest.warns(UserWarning, match="BBB"):
        pm = load_prices(write(tmp_path, text))
    assert pm.tickers == ("AAA", "CCC")


@pytest.mark.parametrize("text,lineno", [
    (GOOD.replace("2024-01-04,121,49,10", "2024-01-04,121,49"), 4),
    (GOOD.replace("2024-01-04,121,49,10", "2024-01-04,abc,49,10"), 4),
    (GOOD.replace("2024-01-05", "2024-01-03"), 5),
    (GOOD.replace("2024-01-03", "03/01/2024"), 3),
    ("# provenance\n" + GOOD.replace("2024-01-08,105", "2024-01-08,-1"), None),
])
def test_malformed_reports_line(tmp_path, text, lineno):
    with pytest.raises(DataFormatError) as exc:
        load_prices(write(tmp_path, text))
    if lineno is not None:
        assert exc.value.lineno == lineno


def test_comment_lines_keep_line_numbers(tmp_path):
    text = "# a\n# b\n" + GOOD.replace("2024-01-04,121,49,10", "2024-01-04,x,49,10")
    with pytest.raises(DataFormatError) as exc:
        load_prices(write(tmp_path, text))
    assert exc.value.lineno == 6


@pytest.mark.parametrize("text", ["", "date,AAA\n", "when,AAA\n2024-01-01,1\n"])
def test_empty_or_bad_header(tmp_path, text):
    with pytest.raises(DataFormatError):
        load_prices(write(tmp_path, text))


def test_compute_returns_examples():
    pm = PriceMatrix(("A",), np.array(["2024-01-01", "2024-01-02"], dtype="datetime64[D]"), [[100.0, 110.0]])
    assert compute_returns(pm).values[0, 0] == pytest.approx(0.10, rel=1e-15)
    dates = np.arange(np.datetime64("2024-01-01"), np.datetime64("2024-01-06"))
    const = PriceMatrix(("A",), dates, [[5.0] * 5])
    np.testing.assert_array_equal(compute_returns(const).values, 0.0)
    pm = PriceMatrix(("A",), dates, [[1.0, 2.0, 4.0, 3.0, 8.0]])
    r = compute_returns(pm, 2)
    np.testing.assert_allclose(r.values, [[3.0, 1.0]])
    assert r.interval == 2 and r.dates.tolist() == [dates[2].item(), dates[4].item()]
    with pytest.raises(ValueError):
        compute_returns(pm, 5)


def test_returns_reconstruct_prices(tmp_path):
    pm = load_prices(write(tmp_path, GOOD))
    for dt in (1, 2, 3):
        r = compute_returns(pm, dt)
        idx = np.arange(0, pm.prices.shape[1], dt)
        s = pm.prices[:, idx]
        np.testing.assert_allclose(s[:, :-1] * (1 + r.values), s[:, 1:], rtol=1e-15)
        assert r.t == (pm.prices.shape[1] - 1) // dt


def test_returns_file_round_trip(tmp_path, cov3):
    rm = generate_synthetic(EnsembleSpec(cov3, 4.0), 50, RngStream(1))
    path = tmp_path / "r.csv"
    write_returns(rm, path, {"seed": 1})
    back = load_returns(path)
    np.testing.assert_array_equal(back.values, rm.values)
    assert back.tickers == rm.tickers


def test_synthetic_covariance_and_reproducibility(cov3):
    spec = EnsembleSpec(cov3, 6.0)
    rm = generate_synthetic(spec, 100_000, RngStream(17))
    est = sample_covariance(rm).cov
    # SE of a covariance entry: sqrt(var(x_i x_j) / T), from the sample itself
    x = rm.values - rm.values.mean(1, keepdims=True)
    prod = np.einsum("it,jt->ijt", x, x)
    se = prod.std(axis=2) / np.sqrt(rm.t)
    assert np.all(np.abs(est - cov3.cov) < 4 * se)
    np.testing.assert_array_equal(rm.values[:, :5], generate_synthetic(spec, 100_000, RngStream(17)).values[:, :5])
    from scipy.stats import kurtosis
    k = kurtosis(rm.values / cov3.sigma[:, None], axis=1)
    np.testing.assert_allclose(k, 1.0, rtol=0.15)


def test_histogram_density(tmp_path):
    y = np.linspace(0.05, 0.95, 10)
    centers, counts, density = histogram(y, 10, (0.0, 1.0))
    assert np.sum(density * 0.1) == pytest.approx(1.0, abs=1e-12)
    y = np.random.default_rng(0).standard_normal(1000)
    path_a, path_b = tmp_path / "a.csv", tmp_path / "b.csv"
    c, n, d = write_histogram(y, path_a, 37)
    write_histogram(y, path_b, 37)
    assert path_a.read_bytes() == path_b.read_bytes()
    assert np.sum(d * np.diff(c).mean()) == pytest.approx(1.0, abs=1e-12)
    head = path_a.read_text().splitlines()[0]
    assert head == "bin_center,count,density"
    with pytest.raises(ValueError):
        histogram([], 10)


def test_results_round_trip(tmp_path):
    y = np.random.default_rng(2).standard_normal(500)
    res = fit_n_min_dist(y)
    record = result_record(res, alpha=1.5e-3, seed=4, config={"k": 20})
    for key in ("method", "n_hat", "alpha", "objective", "seed", "config", "sample_count"):
        assert key in record
    assert record["provenance"]["version"]
    path = tmp_path / "fit.json"
    write_results(record, path)
    assert read_results(path) == record
    text = path.read_text()
    write_results(record, path)
    assert path.read_text() == text


def test_write_to_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        write_histogram([0.1, 0.2], tmp_path / "missing" / "h.csv")


def test_return_matrix_validation():
    with pytest.raises(ValueError):
        ReturnMatrix(("A",), [[0.1, np.inf]])
    with pytest.raises(ValueError):
        ReturnMatrix(("A", "B"), [[0.1, 0.2]])

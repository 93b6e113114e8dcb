import numpy as np
import pytest
from scipy import stats
from scipy.optimize import brentq

from stochcorr.dist import rescaled_cdf
from stochcorr.ensemble import EnsembleSpec, sample_mixture_return
from stochcorr.fit import (FitConfig, count_local_minima, cvm_statistic, fit_n_min_dist, fit_n_mle,
                           fit_normal_mle, fit_student_t_mle, ks_distance, objective_grid)
from stochcorr.linalg import CovarianceModel
from stochcorr.rng import RngStream


def synthetic(n, m, seed):
    spec = EnsembleSpec(CovarianceModel.identity(1), n)
    return sample_mixture_return(spec, RngStream(seed), size=m)[:, 0]


def model_quantiles(n, m):
    p = (np.arange(1, m + 1) - 0.5) / m
    return np.array([brentq(lambda y: rescaled_cdf(n, y) - pi, -60, 60, xtol=1e-15) for pi in p])


@pytest.fixture(scope="module")
def sample39():
    return synthetic(3.9, 100_000, 2024)


def test_config_validation():
    with pytest.raises(ValueError):
        FitConfig(method="grid")
    with pytest.raises(ValueError):
        FitConfig(weight_c=0.0)
    with pytest.raises(ValueError):
        FitConfig(n_bounds=(5.0, 2.0))


def test_cvm_zero_at_model_quantiles():
    y = model_quantiles(3.9, 400)
    assert cvm_statistic(y, 3.9) < 1e-20


def test_cvm_decreases_as_window_shrinks(sample39):
    y = sample39[:5000]
    vals = [cvm_statistic(y, 3.0, c) for c in (1.0, 0.3, 0.07, 0.01)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_cvm_rejects_non_finite():
    with pytest.raises(ValueError):
        cvm_statistic([0.1, np.nan], 3.0)


def test_cvm_prefers_true_n(sample39):
    at_true = cvm_statistic(sample39, 3.9)
    assert at_true < cvm_statistic(sample39, 2.0)
    assert at_true < cvm_statistic(sample39, 50.0)


def test_min_dist_recovers_n(sample39):
    res = fit_n_min_dist(sample39)
    assert 3.6 <= res.n_hat <= 4.2
    assert not res.boundary
    lo, hi = res.config.n_bounds
    assert res.objective <= cvm_statistic(sample39, lo)
    assert res.objective <= cvm_statistic(sample39, hi)
    assert res.sample_count == sample39.size and res.ks_distance < 0.01


def test_mle_recovers_n(sample39):
    res = fit_n_mle(sample39)
    assert 3.7 <= res.n_hat <= 4.1
    assert res.method == "mle" and not res.boundary


def test_large_n_is_weakly_identified():
    res = fit_n_min_dist(synthetic(50.0, 100_000, 7))
    assert res.n_hat > 20


def test_gaussian_quantiles_hit_upper_bound():
    y = stats.norm.ppf((np.arange(1, 20_001) - 0.5) / 20_000)
    for res in (fit_n_min_dist(y), fit_n_mle(y)):
        assert res.boundary and res.n_hat == res.config.n_bounds[1]


def test_mle_more_tail_sensitive_than_min_dist():
    y = synthetic(3.9, 100_000, 99)
    rng = np.random.default_rng(5)
    hit = rng.random(y.size) < 0.02
    y = np.where(hit, 4.0 * y, y)
    assert fit_n_mle(y).n_hat < fit_n_min_dist(y).n_hat


def test_degenerate_samples():
    with pytest.raises(ValueError):
        fit_n_mle(np.full(100, 0.3))
    with pytest.raises(ValueError):
        fit_normal_mle([1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        fit_student_t_mle([1.0, 2.0])


def test_scale_equivariance(sample39):
    raw = 0.013 * sample39[:20_000]
    alpha = 0.013**2
    s = 7.5
    a = fit_n_min_dist(raw / np.sqrt(alpha))
    b = fit_n_min_dist((s * raw) / np.sqrt(s * s * alpha))
    assert a.n_hat == pytest.approx(b.n_hat, rel=1e-6)


def test_insensitive_to_extreme_replacement(sample39):
    y = np.sort(sample39)
    m = y.size // 1000
    z = y.copy()
    z[:m], z[-m:] = -10.0, 10.0
    assert fit_n_min_dist(z).n_hat == pytest.approx(fit_n_min_dist(y).n_hat, rel=1e-6)


@pytest.mark.parametrize("n", [2.0, 10.0])
def test_objective_unimodal_on_grid(n):
    y = synthetic(n, 50_000, 31)
    grid = np.arange(1.5, 50.0001, 0.1)
    assert count_local_minima(objective_grid(y, grid)) == 1


@pytest.mark.slow
@pytest.mark.parametrize("n", [2.0, 3.9, 10.0])
def test_consistency_error_shrinks(n):
    errs = []
    for m in (10_000, 100_000):
        est = [fit_n_mle(synthetic(n, m, s)).n_hat for s in range(5)]
        errs.append(np.sqrt(np.mean((np.array(est) - n) ** 2)))
    assert errs[1] < errs[0]
    assert errs[1] < 0.1 * n


def test_normal_mle(sample39):
    y = np.random.default_rng(0).standard_normal(100_000)
    mu, sigma = fit_normal_mle(y)
    assert abs(mu) < 0.02 and 0.99 < sigma < 1.01
    assert sigma == pytest.approx(y.std(ddof=0))


def test_student_t_matches_scipy_on_heavy_tails():
    y = stats.t.rvs(4.0, loc=0.2, scale=1.5, size=20_000, random_state=3)
    ours = fit_student_t_mle(y)
    ref = stats.t.fit(y)
    assert ours.nu == pytest.approx(ref[0], rel=1e-3)
    assert ours.mu == pytest.approx(ref[1], abs=2e-3)
    assert ours.scale == pytest.approx(ref[2], rel=1e-3)


def test_student_t_cauchy_and_gaussian():
    c = fit_student_t_mle(np.random.default_rng(1).standard_cauchy(100_000))
    assert c.nu == pytest.approx(1.0, abs=0.05)
    g = fit_student_t_mle(stats.norm.ppf((np.arange(1, 20_001) - 0.5) / 20_000))
    assert g.boundary and g.nu == pytest.approx(1000.0, rel=1e-6)


def test_ks_distance_against_scipy(sample39):
    y = sample39[:2000]
    ref = stats.kstest(y, lambda v: rescaled_cdf(3.9, v)).statistic
    assert ks_distance(y, 3.9) == pytest.approx(ref, rel=1e-12)


def test_result_dict_round_trip(sample39):
    d = fit_n_min_dist(sample39[:2000]).to_dict()
    assert d["config"]["n_bounds"] == [1.05, 500.0] and d["method"] == "min_dist_cvm"

"""Estimation of the fluctuation parameter N and of the baseline distributions.

Two estimators for N work on rescaled portfolio returns:

* minimum distance: minimize a Cramer-von Mises distance between the model
  CDF and the empirical CDF, weighted by ``exp(-y^2 / (2 c^2))`` so the
  center of the distribution dominates;
* maximum likelihood on the K-Bessel density.

Both run a bounded Brent search in ``log N``.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize
from scipy.special import digamma, gammaln

from .dist import rescaled_cdf, rescaled_logpdf

METHODS = ("min_dist_cvm", "mle")
T_NU_BOUNDS = (0.5, 1000.0)
# relative distance in log N that counts as sitting on a bound
BOUNDARY_RTOL = 1e-3


@dataclass(frozen=True)
class FitConfig:
    method: str = "min_dist_cvm"
    weight_c: float = 0.07
    n_bounds: tuple = (1.05, 500.0)
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.weight_c > 0:
            raise ValueError("weight_c must be positive")
        lo, hi = (float(b) for b in self.n_bounds)
        if not 0 < lo < hi or not math.isfinite(hi):
            raise ValueError(f"need 0 < low < high for n_bounds, got {self.n_bounds!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "n_bounds", (lo, hi))


@dataclass
class FitResult:
    n_hat: float
    objective: float
    method: str
    sample_count: int
    ks_distance: float
    iterations: int
    boundary: bool = False
    config: FitConfig = field(default_factory=FitConfig)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["config"]["n_bounds"] = list(self.config.n_bounds)
        return out


class NormalFit(NamedTuple):
    mu: float
    sigma: float


class StudentTFit(NamedTuple):
    nu: float
    mu: float
    scale: float
    boundary: bool


def _clean(samples, minimum=1) -> np.ndarray:
    y = np.asarray(samples, dtype=float).ravel()
    if y.size < minimum:
        raise ValueError(f"need at least {minimum} samples, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise ValueError("samples contain non-finite values")
    return y


def _check_spread(y):
    if np.ptp(y) == 0:
        raise ValueError("all samples are identical; the likelihood is degenerate")


def cvm_statistic(samples, n_param: float, weight_c: float = 0.07) -> float:
    """Center-weighted Cramer-von Mises distance to the rescaled model.

    ``sum_i [F(y_i; N) - (i - 1/2)/M]^2 exp(-y_i^2 / (2 c^2))`` over the
    sorted samples ``y_i``. Points whose weight underflows to zero are
    skipped, which leaves the value unchanged.
    """
    if not weight_c > 0:
        raise ValueError("weight_c must be positive")
    y = np.sort(_clean(samples))
    m = y.size
    weight = np.exp(-0.5 * (y / weight_c) ** 2)
    live = np.flatnonzero(weight > 0)
    if live.size == 0:
        return 0.0
    emp = (live + 0.5) / m
    diff = rescaled_cdf(n_param, y[live]) - emp
    return float(np.sum(diff * diff * weight[live]))


def ks_distance(samples, n_param: float) -> float:
    """Kolmogorov-Smirnov distance between the samples and the rescaled model."""
    y = np.sort(_clean(samples))
    m = y.size
    f = rescaled_cdf(n_param, y)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def negative_log_likelihood(samples, n_param: float) -> float:
    y = _clean(samples)
    return -float(np.sum(rescaled_logpdf(n_param, y)))


def _minimize_log_n(objective, config: FitConfig):
    lo, hi = config.n_bounds
    res = optimize.minimize_scalar(
        lambda t: objective(math.exp(t)),
        bounds=(math.log(lo), math.log(hi)),
        method="bounded",
        options={"xatol": config.tolerance},
    )
    n_hat, best = math.exp(res.x), float(res.fun)
    # the bounded search never evaluates the end points themselves
    for b in (lo, hi):
        val = objective(b)
        if val <= best:
            n_hat, best = b, val
    span = math.log(hi / lo)
    boundary = min(math.log(n_hat / lo), math.log(hi / n_hat)) <= BOUNDARY_RTOL * span
    return n_hat, best, int(res.nfev), boundary


def fit_n_min_dist(samples, config: FitConfig = None) -> FitResult:
    """Minimum-distance estimate of N from rescaled returns.

    A result at either end of ``config.n_bounds`` is returned with
    ``boundary=True`` rather than raising.
    """
    config = config or FitConfig()
    y = np.sort(_clean(samples))
    n_hat, obj, nfev, boundary = _minimize_log_n(
        lambda n: cvm_statistic(y, n, config.weight_c), config)
    return FitResult(n_hat, obj, "min_dist_cvm", y.size, ks_distance(y, n_hat), nfev, boundary,
                     config)


def fit_n_mle(samples, config: FitConfig = None) -> FitResult:
    """Maximum-likelihood estimate of N; ``objective`` is the negative log likelihood."""
    config = config or FitConfig(method="mle")
    y = _clean(samples)
    _check_spread(y)
    n_hat, obj, nfev, boundary = _minimize_log_n(lambda n: negative_log_likelihood(y, n), config)
    return FitResult(n_hat, obj, "mle", y.size, ks_distance(y, n_hat), nfev, boundary, config)


def fit_n(samples, config: FitConfig = None) -> FitResult:
    config = config or FitConfig()
    if config.method == "mle":
        return fit_n_mle(samples, config)
    return fit_n_min_dist(samples, config)


def objective_grid(samples, grid, config: FitConfig = None) -> np.ndarray:
    """Objective of ``config.method`` on a grid of N values, for unimodality checks."""
    config = config or FitConfig()
    y = np.sort(_clean(samples))
    if config.method == "mle":
        return np.array([negative_log_likelihood(y, n) for n in grid])
    return np.array([cvm_statistic(y, n, config.weight_c) for n in grid])


def count_local_minima(values) -> int:
    """Number of strict interior local minima of a sampled curve."""
    v = np.asarray(values, dtype=float)
    return int(np.sum((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])))


def fit_normal_mle(samples) -> NormalFit:
    """Closed-form normal MLE: sample mean and the 1/M standard deviation."""
    y = _clean(samples, 3)
    _check_spread(y)
    return NormalFit(float(y.mean()), float(y.std()))


def _t_nll_and_grad(theta, y):
    log_nu, mu, log_s = theta
    nu, s = math.exp(log_nu), math.exp(log_s)
    m = y.size
    z = (y - mu) / s
    q = z * z / nu
    l1q = np.log1p(q)
    nll = -(m * (gammaln(0.5 * (nu + 1)) - gammaln(0.5 * nu) - 0.5 * math.log(nu * math.pi) - log_s)
            - 0.5 * (nu + 1) * l1q.sum())
    frac = q / (1 + q)
    d_nu = -(m * 0.5 * (digamma(0.5 * (nu + 1)) - digamma(0.5 * nu) - 1.0 / nu)
             - 0.5 * l1q.sum() + 0.5 * (nu + 1) * frac.sum() / nu)
    d_mu = -((nu + 1) * np.sum(z / (nu + z * z)) / s)
    d_logs = -(-m + (nu + 1) * frac.sum())
    return nll, np.array([d_nu * nu, d_mu, d_logs])


def fit_student_t_mle(samples, nu_bounds=T_NU_BOUNDS) -> StudentTFit:
    """Student-t MLE over ``(nu, mu, scale)`` with ``nu`` restricted to ``nu_bounds``.

    ``boundary`` is set when ``nu`` ends on either bound (Gaussian-like data
    drive it to the upper one).
    """
    y = _clean(samples, 3)
    _check_spread(y)
    lo, hi = nu_bounds
    med = float(np.median(y))
    mad = float(np.median(np.abs(y - med))) * 1.4826 or float(y.std())
    x0 = np.array([math.log(min(max(5.0, lo), hi)), med, math.log(mad)])
    res = optimize.minimize(_t_nll_and_grad, x0, args=(y,), jac=True, method="L-BFGS-B",
                            bounds=[(math.log(lo), math.log(hi)), (None, None), (None, None)],
                            options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 500})
    log_nu, mu, log_s = res.x
    span = math.log(hi / lo)
    boundary = min(log_nu - math.log(lo), math.log(hi) - log_nu) <= BOUNDARY_RTOL * span
    return StudentTFit(math.exp(log_nu), float(mu), math.exp(log_s), bool(boundary))

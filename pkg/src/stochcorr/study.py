"""End-to-end studies: portfolios from a return matrix, pooled rescaled fits, sweeps.

The pipeline for one fit:

1. pick ``portfolios`` random subsets of ``k`` assets from the universe,
2. draw weights for each subset with the configured scheme,
3. estimate ``alpha = u^T Sigma u`` from the sample covariance of the
   subset and form ``R = u^T r``,
4. pool ``R / sqrt(alpha)`` over all portfolios and fit N.

Every portfolio gets its own RNG stream, so results do not depend on the
order in which portfolios are processed.
"""

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .ensemble import EnsembleSpec
from .fit import FitConfig, fit_n, fit_normal_mle, fit_student_t_mle
from .ingest import PriceMatrix, ReturnMatrix, compute_returns, generate_synthetic
from .linalg import CovarianceModel, sample_covariance
from .portfolio import equal_weights, markowitz_weights, portfolio_alpha, uniform_weights
from .rng import RngStream

WEIGHT_SCHEMES = ("uniform", "equal", "markowitz")
SCALES = ("rescaled", "raw")
SWEEP_AXES = ("dt", "k", "a")

# stream ids under the study seed
_DATA_STREAM = 0
_PORTFOLIO_STREAM = 1
_MARKET_STREAM = 2


@dataclass(frozen=True)
class StudyConfig:
    portfolios: int = 600
    k: int = 20
    weights: str = "uniform"
    a: float = 0.5
    normalization: str = "shift"
    dt: int = 1
    seed: int = 0
    method: str = "min_dist_cvm"
    weight_c: float = 0.07
    scale: str = "rescaled"
    n_bounds: tuple = (1.05, 500.0)

    def __post_init__(self):
        if self.portfolios < 1 or self.k < 1 or self.dt < 1:
            raise ValueError("portfolio count, k and dt must be positive")
        if self.weights not in WEIGHT_SCHEMES:
            raise ValueError(f"unknown weight scheme {self.weights!r}")
        if self.weights == "uniform" and self.k < 2:
            raise ValueError("uniform weights need k >= 2")
        if self.scale not in SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")
        if not self.a > 0:
            raise ValueError("a must be positive")
        self.fit_config()

    def fit_config(self, weight_c=None) -> FitConfig:
        return FitConfig(self.method, self.weight_c if weight_c is None else weight_c,
                         tuple(self.n_bounds))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_bounds"] = list(self.n_bounds)
        return out


@dataclass
class StudyResult:
    fit: object
    samples: np.ndarray
    alphas: np.ndarray
    assets: list
    normal: object
    student_t: object
    fit_variable_scale: float

    @property
    def alpha_mean(self) -> float:
        return float(np.mean(self.alphas))


def random_market(k: int, rng, sigma_range=(0.01, 0.03), beta_range=(0.2, 0.6)) -> CovarianceModel:
    """One-factor market: ``C = b b^T + diag(1 - b^2)`` with random volatilities."""
    gen = RngStream(rng, _MARKET_STREAM).generator() if isinstance(rng, int) else rng
    sigma = gen.uniform(*sigma_range, size=k)
    beta = gen.uniform(*beta_range, size=k)
    corr = np.outer(beta, beta)
    np.fill_diagonal(corr, 1.0)
    return CovarianceModel.from_corr(sigma, corr)


def synthetic_returns(n_param: float, universe: int, t: int, seed: int) -> ReturnMatrix:
    market = random_market(universe, seed)
    return generate_synthetic(EnsembleSpec(market, n_param), t, RngStream(seed, _DATA_STREAM))


def prices_from_returns(returns: ReturnMatrix, start: float = 100.0) -> PriceMatrix:
    """Price paths ``S(t+1) = S(t)(1 + r)`` starting at ``start``; used for dt sweeps."""
    growth = 1.0 + returns.values
    if np.any(growth <= 0):
        raise ValueError("a return of -100% or less cannot be turned into a price path")
    k, t = returns.values.shape
    prices = np.empty((k, t + 1))
    prices[:, 0] = start
    prices[:, 1:] = start * np.cumprod(growth, axis=1)
    dates = returns.dates
    if dates is None:
        dates = np.busday_offset(np.datetime64("2000-01-03", "D"), np.arange(t))
    first = np.busday_offset(dates[0], -1, roll="backward")
    return PriceMatrix(returns.tickers, np.concatenate([[first], dates]), prices)


def select_assets(universe: int, k: int, stream: RngStream) -> np.ndarray:
    """Random subset of ``k`` asset indices, sorted; the full universe when ``k == universe``."""
    if k > universe:
        raise ValueError(f"portfolio size {k} exceeds the {universe} available assets")
    if k == universe:
        return np.arange(universe)
    return np.sort(stream.generator().permutation(universe)[:k])


def portfolio_weights(config: StudyConfig, cov: np.ndarray, stream: RngStream) -> np.ndarray:
    if config.weights == "uniform":
        return uniform_weights(config.k, config.a, stream, config.normalization)
    if config.weights == "equal":
        return equal_weights(config.k)
    return markowitz_weights(cov)


def build_portfolios(returns: ReturnMatrix, config: StudyConfig):
    """Per-portfolio asset sets, weights, alphas and return series."""
    universe = returns.k
    deterministic = config.weights != "uniform" and config.k == universe
    count = 1 if deterministic else config.portfolios
    root = RngStream(config.seed, _PORTFOLIO_STREAM)
    assets, weights, alphas, series = [], [], [], []
    for p in range(count):
        stream = root.child(p)
        idx = select_assets(universe, config.k, stream.child(0))
        sub = returns.values[idx]
        cov = sample_covariance(sub).cov
        u = portfolio_weights(config, cov, stream.child(1))
        assets.append(idx)
        weights.append(u)
        alphas.append(portfolio_alpha(u, cov))
        series.append(u @ sub)
    return assets, np.array(weights), np.array(alphas), np.array(series)


def run_fit_study(returns: ReturnMatrix, config: StudyConfig) -> StudyResult:
    """Build portfolios, pool the returns and fit N plus the normal and t baselines.

    With ``scale="rescaled"`` each portfolio series is divided by its own
    ``sqrt(alpha)``. With ``scale="raw"`` the pooled series is divided by
    the square root of the average alpha instead, and the CvM weight width
    is converted so that ``weight_c`` stays in units of the raw return.
    """
    assets, _, alphas, series = build_portfolios(returns, config)
    if config.scale == "rescaled":
        pooled = (series / np.sqrt(alphas)[:, None]).ravel()
        unit = 1.0
    else:
        unit = math.sqrt(float(np.mean(alphas)))
        pooled = series.ravel() / unit
    fit = fit_n(pooled, config.fit_config(config.weight_c / unit))
    return StudyResult(fit, pooled, alphas, assets, fit_normal_mle(pooled),
                       fit_student_t_mle(pooled), unit)


def _returns_at(data, dt: int) -> ReturnMatrix:
    if isinstance(data, PriceMatrix):
        return compute_returns(data, dt)
    if dt == 1:
        return data
    return compute_returns(prices_from_returns(data), dt)


def run_sweep(data, config: StudyConfig, axis: str, values) -> list:
    """One ``(value, alpha_mean, n_hat, boundary)`` row per sweep value.

    ``data`` is a :class:`PriceMatrix` or a daily :class:`ReturnMatrix`;
    the latter is compounded into prices when ``dt`` varies. Portfolio
    streams are keyed by index only, so a k sweep reuses the same random
    asset orderings and an a sweep the same uniform draws.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    rows = []
    for value in values:
        if axis == "dt":
            cfg = replace(config, dt=int(value))
        elif axis == "k":
            cfg = replace(config, k=int(value))
        else:
            cfg = replace(config, a=float(value))
        result = run_fit_study(_returns_at(data, cfg.dt), cfg)
        rows.append((value, result.alpha_mean, result.fit.n_hat, result.fit.boundary))
    return rows

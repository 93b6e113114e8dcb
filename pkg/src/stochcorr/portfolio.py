"""Portfolio weights and the map from asset returns to portfolio returns.

A portfolio return ``R = u^T r`` under the averaged model has the
one-dimensional K-Bessel density with scale ``alpha = u^T Sigma u``; dividing
by ``sqrt(alpha)`` removes every dependence on ``u`` and ``Sigma``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import CovarianceModel, bilinear, solve_spd
from .rng import as_generator

SUM_TOL = 1e-12
# ratio normalization rejects raw draws whose sum is below this multiple of a*sqrt(k)
REDRAW_GUARD = 0.1
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class PortfolioSpec:
    weights: np.ndarray
    alpha: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if abs(w.sum() - 1.0) > SUM_TOL * max(1.0, np.abs(w).sum()):
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def build(cls, weights, cov_model: CovarianceModel) -> "PortfolioSpec":
        return cls(np.asarray(weights, dtype=float), portfolio_alpha(weights, cov_model))


def uniform_weights(k: int, a: float, rng, normalization: str = "shift", guard: float = REDRAW_GUARD):
    """Random weights from ``U(-a, a)`` adjusted to sum to one.

    Parameters
    ----------
    k : int
        Number of assets, at least 2.
    a : float
        Half width of the uniform distribution.
    rng
        ``RngStream``, ``Generator`` or seed.
    normalization : {"shift", "ratio"}
        ``"shift"`` subtracts the mean of the raw draws and adds ``1/k``, so
        the weight spread, and with it the portfolio variance, grows with
        ``a``. ``"ratio"`` divides the raw draws by their sum; the result is
        then independent of ``a``, and draws with ``|sum| < guard * a *
        sqrt(k)`` are rejected to avoid exploding weights.
    """
    if k < 2:
        raise ValueError("need at least two assets")
    if not a > 0:
        raise ValueError("a must be positive")
    gen = as_generator(rng)
    if normalization == "shift":
        raw = gen.uniform(-a, a, size=k)
        w = raw - raw.mean() + 1.0 / k
    elif normalization == "ratio":
        for _ in range(MAX_REDRAWS):
            raw = gen.uniform(-a, a, size=k)
            total = raw.sum()
            if abs(total) >= guard * a * math.sqrt(k):
                break
        else:
            raise RuntimeError(f"no acceptable draw in {MAX_REDRAWS} attempts")
        w = raw / total
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    # absorb rounding so the sum is one to the last bit available
    w[-1] = 1.0 - w[:-1].sum()
    return w


def equal_weights(k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("need at least one asset")
    return np.full(k, 1.0 / k)


def markowitz_weights(cov_model) -> np.ndarray:
    """Global minimum-variance weights ``Sigma^-1 g / (g^T Sigma^-1 g)``, ``g = (1, ..., 1)``."""
    cov = getattr(cov_model, "cov", cov_model)
    g = np.ones(np.shape(cov)[0])
    s = solve_spd(cov, g)
    return s / g.dot(s)


def portfolio_alpha(weights, cov_model) -> float:
    """Portfolio variance ``u^T Sigma u``."""
    cov = getattr(cov_model, "cov", cov_model)
    return bilinear(weights, cov, weights)


def portfolio_returns(returns, weights) -> np.ndarray:
    """``R(t) = u^T r(t)`` for a K x T return matrix."""
    r = np.atleast_2d(np.asarray(getattr(returns, "values", returns), dtype=float))
    u = np.asarray(weights, dtype=float)
    if u.ndim != 1 or u.shape[0] != r.shape[0]:
        raise ValueError(f"dimension mismatch: {u.shape[0] if u.ndim else u} weights for {r.shape[0]} assets")
    return u @ r


def rescale_returns(series, alpha: float) -> np.ndarray:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return np.asarray(series, dtype=float) / math.sqrt(alpha)


def make_weights(scheme: str, cov_model, rng=None, a: float = 0.5, normalization: str = "shift"):
    """Weights for the named scheme: ``uniform``, ``equal`` or ``markowitz``."""
    k = cov_model.k
    if scheme == "uniform":
        return uniform_weights(k, a, rng, normalization=normalization)
    if scheme == "equal":
        return equal_weights(k)
    if scheme == "markowitz":
        return markowitz_weights(cov_model)
    raise ValueError(f"unknown weight scheme {scheme!r}")

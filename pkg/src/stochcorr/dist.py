"""Correlation-averaged densities.

Averaging a multivariate normal over a Wishart ensemble of covariance
matrices gives an elliptical density written with the Macdonald function
``K_nu``. Its one-dimensional projections (portfolio returns) depend on the
portfolio variance ``alpha`` and the ensemble parameter ``N`` only, and after
rescaling by ``sqrt(alpha)`` on ``N`` alone.

All densities accept real ``N > 0``. At the origin the analytic limit is
returned when it is finite and :class:`~stochcorr.errors.DivergenceError` is
raised when it is not.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln, ndtr, stdtr

from . import _backend
from .errors import DivergenceError, QuadratureError
from .linalg import CovarianceModel, log_det_spd, solve_spd

LOG_2 = math.log(2.0)
LOG_PI = math.log(math.pi)
# below this K_nu argument the density is replaced by its value at the origin;
# the neglected term is of relative size x**min(2*nu, 2)
_TINY_ARG = 1e-280


def _check_n(n_param):
    n = float(n_param)
    if not (n > 0 and math.isfinite(n)):
        raise ValueError(f"N must be positive and finite, got {n_param!r}")
    return n


def _finite(x, name="x"):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


# -- Bessel K ---------------------------------------------------------------

def log_bessel_k(nu, x):
    """Natural log of the modified Bessel function of the second kind.

    Parameters
    ----------
    nu : float or array_like
        Order. ``K_{-nu} = K_nu``, so the sign is ignored.
    x : float or array_like
        Argument, strictly positive.

    Returns
    -------
    float or ndarray
        ``log K_nu(x)``; finite for arguments up to well beyond 1e5.
    """
    nu_arr, x_arr = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(x_arr > 0)):
        raise ValueError("K_nu(x) requires x > 0")
    out = np.empty(x_arr.shape)
    for order in np.unique(nu_arr):
        sel = nu_arr == order
        out[sel] = _backend.log_kv(float(order), x_arr[sel])
    return float(out) if out.ndim == 0 else out


def bessel_k(nu, x):
    """``K_nu(x)``; raises OverflowError where the value exceeds double range."""
    lk = np.asarray(log_bessel_k(nu, x))
    if np.any(lk > 709.78):
        raise OverflowError("K_nu(x) overflows; use log_bessel_k")
    out = np.exp(lk)
    return float(out) if out.ndim == 0 else out


# -- multivariate density ----------------------------------------------------

@dataclass(frozen=True)
class MvKDist:
    """Ensemble-averaged return density with average covariance ``cov_model.cov``."""

    cov_model: CovarianceModel
    n_param: float

    def __post_init__(self):
        object.__setattr__(self, "n_param", _check_n(self.n_param))

    @property
    def k(self):
        return self.cov_model.k

    def mahalanobis(self, x):
        """``x^T Sigma^-1 x`` for one vector or each row of an (M, K) array."""
        x = _finite(x)
        xs = np.atleast_2d(x)
        if xs.shape[1] != self.k:
            raise ValueError(f"expected vectors of length {self.k}, got shape {x.shape}")
        sol = solve_spd(self.cov_model.cov, xs.T)
        q = np.maximum(np.sum(xs.T * sol, axis=0), 0.0)
        return float(q[0]) if x.ndim == 1 else q

    def logpdf(self, x):
        return mvk_logpdf(self, x)

    def pdf(self, x):
        return mvk_pdf(self, x)


def _mvk_log_norm(k, n, log_det):
    return 0.5 * k * math.log(n / (4.0 * math.pi)) + 0.5 * (k - n + 2) * LOG_2 \
        - math.lgamma(0.5 * n) - 0.5 * log_det


def mvk_logpdf(dist: MvKDist, x):
    """Log of the K-Bessel multivariate density; depends on ``x`` only through ``x^T Sigma^-1 x``."""
    k, n = dist.k, dist.n_param
    q = np.atleast_1d(dist.mahalanobis(x))
    log_det = log_det_spd(dist.cov_model.cov)
    y = np.sqrt(n * q)
    out = np.empty_like(y)
    at_origin = y < _TINY_ARG
    if np.any(at_origin):
        if n <= k:
            raise DivergenceError(f"density diverges at the origin for N={n} <= K={k}")
        out[at_origin] = (0.5 * k * math.log(n / (4.0 * math.pi)) + math.lgamma(0.5 * (n - k))
                          - math.lgamma(0.5 * n) - 0.5 * log_det)
    rest = ~at_origin
    if np.any(rest):
        yr = y[rest]
        out[rest] = (_mvk_log_norm(k, n, log_det) + 0.5 * (n - k) * np.log(yr)
                     + log_bessel_k(0.5 * (k - n), yr))
    return float(out[0]) if np.ndim(x) == 1 else out


def mvk_pdf(dist: MvKDist, x):
    out = np.exp(mvk_logpdf(dist, x))
    return float(out) if np.ndim(out) == 0 else out


def mvk_pdf_integral(dist: MvKDist, x, rtol=1e-12):
    """Same density from the variance-mixing integral, by adaptive Gauss-Kronrod quadrature.

    Independent of the Bessel closed form; used to cross-check it. The
    integrand is taken in ``u = log z`` and scaled by its peak value, with the
    interval split at the peak and at ten curvature widths on either side.

    Raises
    ------
    QuadratureError
        If the estimated relative error exceeds ``100 * rtol``.
    """
    k, n = dist.k, dist.n_param
    x = _finite(x)
    if x.ndim != 1:
        return np.array([mvk_pdf_integral(dist, row, rtol) for row in x])
    q = dist.mahalanobis(x)
    b = 0.5 * (n - k)
    c = 0.25 * n * q
    if c == 0.0 and b <= 0.0:
        raise DivergenceError(f"density diverges at the origin for N={n} <= K={k}")
    ez0 = 0.5 * (b + math.sqrt(b * b + 4.0 * c))
    u0 = math.log(ez0)

    def phi(u):
        # quad probes far into both tails; there the integrand is zero
        if u > 700.0 or (c > 0.0 and u < -700.0):
            return -math.inf
        return b * u - math.exp(u) - c * math.exp(-u)

    phi0 = phi(u0)
    width = 1.0 / math.sqrt(ez0 + c / ez0)

    def f(u):
        return math.exp(phi(u) - phi0)

    edges = [-np.inf, u0 - 10 * width, u0, u0 + 10 * width, np.inf]
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
        total += val
        err += e
    if not total > 0 or err > 100 * rtol * total:
        raise QuadratureError("mixing integral did not converge", achieved=err / total if total else err)
    log_pref = (-k * math.log(2.0 * math.pi) - math.lgamma(0.5 * n)
                - 0.5 * log_det_spd(dist.cov_model.cov) + 0.5 * k * math.log(math.pi * n))
    return math.exp(log_pref + phi0) * total


def mvk_integrand(dist: MvKDist, x, z):
    """Mixing-integral integrand in the original variable ``z`` (without prefactor)."""
    k, n = dist.k, dist.n_param
    q = dist.mahalanobis(x)
    z = np.asarray(z, dtype=float)
    return np.exp((0.5 * n - 1.0) * np.log(z) - z + 0.5 * k * np.log(math.pi * n / z)
                  - n * q / (4.0 * z))


# -- portfolio / rescaled densities -----------------------------------------

def rescaled_logpdf(n_param, r_hat):
    """Log density of a portfolio return divided by ``sqrt(alpha)``."""
    n = _check_n(n_param)
    r = _finite(r_hat, "r_hat")
    a = np.abs(np.atleast_1d(r))
    y = a * math.sqrt(n)
    out = np.empty_like(y)
    at_origin = y < _TINY_ARG
    if np.any(at_origin):
        if n <= 1.0:
            raise DivergenceError(f"density diverges at zero for N={n} <= 1")
        out[at_origin] = (0.5 * math.log(n) + math.lgamma(0.5 * (n - 1)) - LOG_2
                          - 0.5 * LOG_PI - math.lgamma(0.5 * n))
    rest = ~at_origin
    if np.any(rest):
        ar = a[rest]
        out[rest] = (0.5 * (1.0 - n) * LOG_2 - 0.5 * LOG_PI - math.lgamma(0.5 * n)
                     + 0.25 * (n + 1.0) * math.log(n) + 0.5 * (n - 1.0) * np.log(ar)
                     + log_bessel_k(0.5 * (n - 1.0), y[rest]))
    return _scalar_or_array(out if r.ndim else out[0], r)


def rescaled_pdf(n_param, r_hat):
    out = np.exp(rescaled_logpdf(n_param, r_hat))
    return float(out) if np.ndim(out) == 0 else out


def rescaled_cdf(n_param, r_hat):
    """CDF of the rescaled portfolio return, from the chi-square variance mixture."""
    n = _check_n(n_param)
    r = _finite(r_hat, "r_hat")
    out = _backend.kdist_cdf(n, r)
    return float(out) if r.ndim == 0 else out


def rescaled_moments(n_param):
    """``(variance, excess_kurtosis)`` of the rescaled return: ``(1, 6/N)``."""
    n = _check_n(n_param)
    return 1.0, 6.0 / n


@dataclass(frozen=True)
class PortfolioKDist:
    """Portfolio-return density with portfolio variance ``alpha``."""

    alpha: float
    n_param: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "n_param", _check_n(self.n_param))

    def logpdf(self, r):
        return rescaled_logpdf(self.n_param, np.asarray(r, dtype=float) / math.sqrt(self.alpha)) \
            - 0.5 * math.log(self.alpha)

    def pdf(self, r):
        return portfolio_pdf(self, r)

    def cdf(self, r):
        return rescaled_cdf(self.n_param, np.asarray(r, dtype=float) / math.sqrt(self.alpha))


def portfolio_pdf(dist: PortfolioKDist, r):
    out = np.exp(dist.logpdf(r))
    return float(out) if np.ndim(out) == 0 else out


def portfolio_pdf_closed_form(alpha, n_param, r):
    """Density of a raw portfolio return, written directly in ``alpha`` (no rescaling)."""
    n = _check_n(n_param)
    a = np.abs(_finite(r, "r"))
    if np.any(a == 0):
        raise ValueError("closed form is singular at r = 0; use portfolio_pdf")
    log_f = (0.5 * (1.0 - n) * LOG_2 - 0.5 * LOG_PI - math.lgamma(0.5 * n)
             + 0.25 * (n + 1.0) * math.log(n / alpha)
             + 0.5 * (n - 1.0) * np.log(a) + log_bessel_k(0.5 * (n - 1.0), a * math.sqrt(n / alpha)))
    out = np.exp(log_f)
    return float(out) if np.ndim(out) == 0 else out


# -- baselines ---------------------------------------------------------------

def _check_scale(s, name):
    if not (s > 0 and math.isfinite(s)):
        raise ValueError(f"{name} must be positive")


def normal_pdf(mu, sigma, x):
    _check_scale(sigma, "sigma")
    z = (np.asarray(x, dtype=float) - mu) / sigma
    out = np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
    return float(out) if np.ndim(out) == 0 else out


def normal_cdf(mu, sigma, x):
    _check_scale(sigma, "sigma")
    out = ndtr((np.asarray(x, dtype=float) - mu) / sigma)
    return float(out) if np.ndim(out) == 0 else out


def student_t_logpdf(nu, mu, scale, x):
    _check_scale(nu, "nu")
    _check_scale(scale, "scale")
    z = (np.asarray(x, dtype=float) - mu) / scale
    return (gammaln(0.5 * (nu + 1)) - gammaln(0.5 * nu) - 0.5 * math.log(nu * math.pi)
            - math.log(scale) - 0.5 * (nu + 1) * np.log1p(z * z / nu))


def student_t_pdf(nu, mu, scale, x):
    out = np.exp(student_t_logpdf(nu, mu, scale, x))
    return float(out) if np.ndim(out) == 0 else out


def student_t_cdf(nu, mu, scale, x):
    _check_scale(nu, "nu")
    _check_scale(scale, "scale")
    out = stdtr(nu, (np.asarray(x, dtype=float) - mu) / scale)
    return float(out) if np.ndim(out) == 0 else out

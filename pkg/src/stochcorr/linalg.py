"""Dense linear algebra and sample statistics shared by the other modules.

Factorizations go through LAPACK ``potrf``/``potrs`` so that a failed
Cholesky reports the offending pivot. Determinants are only ever formed in
log space.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import NotPositiveDefiniteError, ZeroVarianceError

SYMMETRY_TOL = 1e-12


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def symmetrize(m) -> np.ndarray:
    """Return ``(m + m.T) / 2``, refusing matrices that are not symmetric up to rounding."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: {a.shape}")
    scale = np.max(np.abs(a))
    asym = np.max(np.abs(a - a.T))
    if asym > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class CovarianceModel:
    """Average covariance ``cov = diag(sigma) @ corr @ diag(sigma)``."""

    sigma: np.ndarray
    corr: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        corr = np.asarray(self.corr, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        k = sigma.shape[0]
        if sigma.ndim != 1 or corr.shape != (k, k) or cov.shape != (k, k):
            raise ValueError("inconsistent covariance model dimensions")
        if np.any(sigma <= 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("volatilities must be positive and finite")
        if np.any(np.diag(corr) != 1.0) or np.any(np.abs(corr) > 1.0):
            raise ValueError("correlation matrix needs unit diagonal and entries in [-1, 1]")
        if not np.array_equal(corr, corr.T) or not np.array_equal(cov, cov.T):
            raise ValueError("covariance model must be symmetric")
        for name, a in (("sigma", sigma), ("corr", corr), ("cov", cov)):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def k(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def from_cov(cls, cov) -> "CovarianceModel":
        cov = symmetrize(cov)
        var = np.diag(cov).copy()
        bad = np.flatnonzero(var <= 0)
        if bad.size:
            raise ZeroVarianceError(int(bad[0]))
        sigma = np.sqrt(var)
        corr = cov / np.outer(sigma, sigma)
        np.clip(corr, -1.0, 1.0, out=corr)
        np.fill_diagonal(corr, 1.0)
        corr = 0.5 * (corr + corr.T)
        return cls(sigma, corr, cov)

    @classmethod
    def from_corr(cls, sigma, corr) -> "CovarianceModel":
        sigma = np.asarray(sigma, dtype=float)
        corr = symmetrize(corr)
        np.fill_diagonal(corr, 1.0)
        cov = corr * np.outer(sigma, sigma)
        return cls(sigma, corr, 0.5 * (cov + cov.T))

    @classmethod
    def identity(cls, k: int) -> "CovarianceModel":
        return cls(np.ones(k), np.eye(k), np.eye(k))


def sample_covariance(returns) -> CovarianceModel:
    """Population (1/T) covariance of a K x T return matrix.

    ``returns`` may be a :class:`~stochcorr.ingest.ReturnMatrix` or any
    array with assets along the first axis.
    """
    values = getattr(returns, "values", returns)
    r = np.atleast_2d(np.asarray(values, dtype=float))
    k, t = r.shape
    if t < 2:
        raise ValueError("need at least two observations per asset")
    if not np.all(np.isfinite(r)):
        raise ValueError("returns contain non-finite values")
    centered = r - r.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / t
    var = np.diag(cov)
    for i in range(k):
        # exact zero or rounding residue of a constant series
        if var[i] <= (np.finfo(float).eps * np.max(np.abs(r[i]))) ** 2:
            labels = getattr(returns, "tickers", None)
            raise ZeroVarianceError(i, labels[i] if labels is not None else None)
    return CovarianceModel.from_cov(0.5 * (cov + cov.T))


def cholesky(m) -> np.ndarray:
    """Lower-triangular ``L`` with ``m = L @ L.T``.

    Raises
    ------
    NotPositiveDefiniteError
        With the zero-based index of the first failing pivot.
    """
    a = symmetrize(m)
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:  # pragma: no cover - argument error inside LAPACK
        raise ValueError(f"dpotrf argument {-info} invalid")
    return c


def solve_spd(m, b) -> np.ndarray:
    """Solve ``m @ x = b`` for symmetric positive definite ``m``."""
    chol = cholesky(m)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != chol.shape[0]:
        raise ValueError(f"dimension mismatch: {chol.shape} vs {b.shape}")
    x, info = lapack.dpotrs(chol, b, lower=1)
    if info != 0:  # pragma: no cover
        raise ValueError(f"dpotrs failed with info={info}")
    return x


def log_det_spd(m) -> float:
    chol = cholesky(m)
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def bilinear(u, m, v) -> float:
    """``u.T @ m @ v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or u.shape != (m.shape[0],) or v.shape != (m.shape[1],):
        raise ValueError(f"dimension mismatch: u{u.shape}, m{m.shape}, v{v.shape}")
    return float(u @ m @ v)

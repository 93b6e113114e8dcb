"""Wishart random-correlation ensemble and Monte Carlo samplers.

Two constructive routes to the ensemble-averaged return distribution:

* the matrix route: draw ``W`` (K x N, columns ``N(0, C/N)``), form the
  random covariance ``sigma W W^T sigma`` and draw a normal vector with it;
  needs integer ``N``.
* the mixture route: draw ``z ~ chi2_N`` and a normal vector with covariance
  ``(z/N) Sigma``; valid for any real ``N > 0``.

Both produce the same distribution. Every sampler takes an ``rng`` that may
be an :class:`~stochcorr.rng.RngStream`, a numpy ``Generator`` or a seed,
and an optional ``size`` for batches (leading axis).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefiniteError
from .linalg import CovarianceModel, cholesky, symmetrize
from .rng import as_generator

EIG_CUTOFF = 1e-12
NEG_EIG_TOL = 1e-10


@dataclass(frozen=True)
class EnsembleSpec:
    cov_model: CovarianceModel
    n_param: float

    def __post_init__(self):
        n = float(self.n_param)
        if not (n > 0 and math.isfinite(n)):
            raise ValueError(f"N must be positive and finite, got {self.n_param!r}")
        object.__setattr__(self, "n_param", n)

    @property
    def k(self) -> int:
        return self.cov_model.k

    @property
    def is_integer(self) -> bool:
        return float(self.n_param).is_integer()

    def n_columns(self) -> int:
        if not self.is_integer:
            raise ValueError(
                f"the matrix construction needs an integer N (got {self.n_param}); "
                "use sample_mixture_return for real-valued N")
        return int(self.n_param)


def psd_factor(m, cutoff=EIG_CUTOFF, neg_tol=NEG_EIG_TOL) -> np.ndarray:
    """Factor ``F`` with ``F @ F.T = m`` for a symmetric PSD, possibly singular, matrix.

    Eigenvalues below ``cutoff * lambda_max`` are treated as zero, so draws
    ``F @ xi`` lie exactly in the column space of ``m``.
    """
    m = symmetrize(m)
    lam, vec = np.linalg.eigh(m)
    scale = np.max(np.abs(lam))
    if scale == 0:
        return np.zeros((m.shape[0], 0))
    if lam[0] < -neg_tol * scale:
        raise ValueError(f"matrix has a negative eigenvalue {lam[0]:.3g}")
    keep = lam > cutoff * scale
    return vec[:, keep] * np.sqrt(lam[keep])


def _factor(m):
    try:
        return cholesky(m)
    except NotPositiveDefiniteError:
        return psd_factor(m)


def sample_w(spec: EnsembleSpec, rng, size=None) -> np.ndarray:
    """Gaussian K x N matrix whose columns are iid ``N(0, C/N)``."""
    n = spec.n_columns()
    gen = as_generator(rng)
    lower = _factor(spec.cov_model.corr)
    shape = (spec.k, n) if size is None else (size, spec.k, n)
    xi = gen.standard_normal(shape[:-2] + (lower.shape[1], n))
    return (lower @ xi) / math.sqrt(n)


def sample_wishart_correlation(spec: EnsembleSpec, rng, size=None) -> np.ndarray:
    """``W @ W.T`` for fresh draws of ``W``; rank ``min(K, N)``."""
    w = sample_w(spec, rng, size)
    return w @ np.swapaxes(w, -1, -2)


def sample_wishart_covariance(spec: EnsembleSpec, rng, size=None) -> np.ndarray:
    """``A @ A.T`` with columns of ``A`` iid ``N(0, Sigma/N)``: the Wishart drawn on Sigma directly."""
    n = spec.n_columns()
    gen = as_generator(rng)
    lower = _factor(spec.cov_model.cov)
    shape = (spec.k, n) if size is None else (size, spec.k, n)
    a = lower @ gen.standard_normal(shape[:-2] + (lower.shape[1], n)) / math.sqrt(n)
    return a @ np.swapaxes(a, -1, -2)


def sample_conditional_return(cov_s, rng, size=None) -> np.ndarray:
    """Normal vector(s) with covariance ``cov_s``, which may be singular.

    Raises ValueError for eigenvalues below ``-1e-10 * lambda_max``.
    """
    gen = as_generator(rng)
    f = psd_factor(cov_s)
    k, r = f.shape
    if r == 0:
        return np.zeros(k) if size is None else np.zeros((size, k))
    shape = (r,) if size is None else (size, r)
    return gen.standard_normal(shape) @ f.T


def sample_ensemble_return(spec: EnsembleSpec, rng, size=None) -> np.ndarray:
    """Draw through the matrix route.

    ``sigma W`` is itself a factor of the random covariance
    ``sigma W W^T sigma``, so the conditional normal draw is ``sigma W eta``
    with ``eta ~ N(0, I_N)``; this is exactly the distribution
    ``sample_conditional_return`` would produce, without an eigensolve per draw.
    """
    gen = as_generator(rng)
    w = sample_w(spec, gen, size)
    n = w.shape[-1]
    eta = gen.standard_normal(w.shape[:-2] + (n, 1))
    x = (w @ eta)[..., 0]
    return x * spec.cov_model.sigma


def sample_mixture_return(spec: EnsembleSpec, rng, size=None) -> np.ndarray:
    """Draw ``z ~ chi2_N`` then ``x ~ N(0, (z/N) Sigma)``; any real ``N > 0``."""
    gen = as_generator(rng)
    lower = _factor(spec.cov_model.cov)
    m = 1 if size is None else size
    z = gen.chisquare(spec.n_param, size=m)
    xi = gen.standard_normal((m, lower.shape[1]))
    x = np.sqrt(z / spec.n_param)[:, None] * (xi @ lower.T)
    return x[0] if size is None else x


def wishart_element_variance(spec: EnsembleSpec, i: int, j: int) -> float:
    """Ensemble variance of ``(W W^T)_ij``: ``(c_ij^2 + c_ii c_jj) / N``."""
    k = spec.k
    if not (0 <= i < k and 0 <= j < k):
        raise IndexError(f"indices ({i}, {j}) out of range for K={k}")
    c = spec.cov_model.corr
    return (c[i, j] ** 2 + c[i, i] * c[j, j]) / spec.n_param


def zero_eigenvalue_counts(matrices, rel_tol=1e-10) -> np.ndarray:
    """Number of eigenvalues below ``rel_tol * lambda_max`` for each matrix in a stack."""
    lam = np.linalg.eigvalsh(np.asarray(matrices, dtype=float))
    top = lam[..., -1:]
    return np.sum(lam < rel_tol * top, axis=-1)


class MomentAccumulator:
    """Mergeable running mean and variance (Chan et al. pairwise update).

    Each worker fills its own accumulator from batches; merging the
    accumulators gives the same result as one pass over all samples.
    """

    def __init__(self, shape=()):
        self.count = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def add(self, batch):
        batch = np.asarray(batch, dtype=float)
        other = MomentAccumulator(batch.shape[1:])
        other.count = batch.shape[0]
        other.mean = batch.mean(axis=0)
        other.m2 = ((batch - other.mean) ** 2).sum(axis=0)
        self.merge(other)
        return self

    def merge(self, other):
        if other.count == 0:
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / total)
        self.mean = self.mean + delta * (other.count / total)
        self.count = total
        return self

    @property
    def variance(self):
        """Population variance (divides by the count)."""
        return self.m2 / self.count

    @property
    def standard_error(self):
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


def wishart_moments(spec: EnsembleSpec, rng, draws: int, batch: int = 100_000):
    """Monte Carlo mean and variance of ``W W^T`` entries over ``draws`` samples."""
    gen = as_generator(rng)
    acc = MomentAccumulator((spec.k, spec.k))
    done = 0
    while done < draws:
        m = min(batch, draws - done)
        acc.add(sample_wishart_correlation(spec, gen, size=m))
        done += m
    return acc

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same algorithms and constants as ``_kernels_py``."""

import numpy as np

from libc.math cimport (
    erfc, exp, log, sin, sinh, cosh, fabs, isfinite, M_PI,
)

from ._kernels_py import EPS, MAXIT, X_SWITCH, X_MIN, MAX_ORDER, kdist_lattice, _temme_gammas
from ._kernels_py import DEBYE_MIN, debye_log_kv
from ._kernels_py import _ERFC_CUT

cdef double c_EPS = EPS
cdef int c_MAXIT = MAXIT
cdef double c_X_SWITCH = X_SWITCH


cdef int _temme(double mu, double gam1, double gam2, double gampl, double gammi,
                double x, double *log_k, double *ratio) noexcept nogil:
    cdef double x2 = 0.5 * x
    cdef double pimu = M_PI * mu
    cdef double fact = 1.0 if fabs(pimu) < c_EPS else pimu / sin(pimu)
    cdef double d = -log(x2)
    cdef double e = mu * d
    cdef double fact2 = 1.0 if fabs(e) < 1e-8 else sinh(e) / e
    cdef double ff = fact * (gam1 * cosh(e) + gam2 * fact2 * d)
    cdef double total = ff
    cdef double ee = exp(e)
    cdef double p = 0.5 * ee / gampl
    cdef double q = 0.5 / (ee * gammi)
    cdef double c = 1.0
    cdef double dd = x2 * x2
    cdef double total1 = p
    cdef double dl
    cdef int i
    for i in range(1, c_MAXIT):
        ff = (i * ff + p + q) / (i * i - mu * mu)
        c *= dd / i
        p /= i - mu
        q /= i + mu
        dl = c * ff
        total += dl
        total1 += c * (p - i * ff)
        if fabs(dl) < fabs(total) * c_EPS:
            log_k[0] = log(total)
            ratio[0] = (total1 / total) * (2.0 / x)
            return 0
    return -1


cdef int _cf2(double mu, double x, double *log_k, double *ratio) noexcept nogil:
    cdef double b = 2.0 * (1.0 + x)
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double delh = d
    cdef double q1 = 0.0
    cdef double q2 = 1.0
    cdef double a1 = 0.25 - mu * mu
    cdef double q = a1
    cdef double c = a1
    cdef double a = -a1
    cdef double s = 1.0 + q * delh
    cdef double qnew, dels
    cdef int i
    for i in range(2, c_MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if fabs(dels) < fabs(s) * c_EPS:
            h = a1 * h
            log_k[0] = 0.5 * log(M_PI / (2.0 * x)) - log(s) - x
            ratio[0] = (mu + x + 0.5 - h) / x
            return 0
    return -1


def log_kv(double nu, x):
    """``log K_nu(x)`` for scalar ``nu`` and array ``x``."""
    if not isfinite(nu):
        raise ValueError("order must be finite")
    nu = fabs(nu)
    if nu > MAX_ORDER:
        raise ValueError(f"order {nu} exceeds supported maximum {MAX_ORDER}")
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("K_nu(x) requires x > 0")
    if np.any(arr < X_MIN) or np.any(~np.isfinite(arr)):
        raise ValueError(f"argument outside supported range [{X_MIN}, inf)")
    if nu > DEBYE_MIN:
        return debye_log_kv(nu, arr)
    shape = arr.shape
    cdef double[::1] xs = np.ascontiguousarray(arr.ravel())
    out_arr = np.empty(xs.shape[0])
    cdef double[::1] out = out_arr
    cdef int nl = <int>(nu + 0.5)
    cdef double mu = nu - nl
    cdef double gam1, gam2, gampl, gammi
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    cdef Py_ssize_t j
    cdef int i, status = 0
    cdef double lk, r, xv
    with nogil:
        for j in range(xs.shape[0]):
            xv = xs[j]
            if xv <= c_X_SWITCH:
                status = _temme(mu, gam1, gam2, gampl, gammi, xv, &lk, &r)
            else:
                status = _cf2(mu, xv, &lk, &r)
            if status != 0:
                break
            for i in range(1, nl + 1):
                lk += log(r)
                r = (mu + i) * (2.0 / xv) + 1.0 / r
            out[j] = lk
    if status != 0:
        raise ArithmeticError("Bessel K evaluation failed to converge")
    if not np.all(np.isfinite(out_arr)):
        raise OverflowError("log K_nu(x) not representable for the given order/argument")
    return out_arr.reshape(shape)


def kdist_cdf(double n, r):
    """CDF of the unit-variance K-distribution with shape parameter ``n``."""
    if not n > 0:
        raise ValueError("shape parameter must be positive")
    arr = np.asarray(r, dtype=float)
    shape = arr.shape
    cdef double[::1] rs = np.ascontiguousarray(arr.ravel())
    out_arr = np.empty(rs.shape[0])
    cdef double[::1] out = out_arr
    lattice = kdist_lattice(n)
    cdef double h = lattice[0]
    cdef double[::1] w = np.ascontiguousarray(lattice[1])
    cdef double[::1] s = np.ascontiguousarray(lattice[2])
    cdef Py_ssize_t nodes = w.shape[0]
    cdef double cut = _ERFC_CUT
    cdef double a, arg, upper
    cdef Py_ssize_t j, m
    with nogil:
        for j in range(rs.shape[0]):
            a = fabs(rs[j])
            if a == 0.0 or a != a:
                out[j] = 0.5
                continue
            if not isfinite(a):
                out[j] = 1.0 if rs[j] > 0 else 0.0
                continue
            upper = 0.0
            # s decreases along the lattice, so the argument does too
            for m in range(nodes - 1, -1, -1):
                arg = a * s[m]
                if arg > cut:
                    break
                upper += w[m] * erfc(arg)
            upper *= 0.5 * h
            out[j] = 1.0 - upper if rs[j] > 0 else upper
    return out_arr.reshape(shape)

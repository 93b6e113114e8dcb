"""Pure numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` line for line; used when the compiled extension is
unavailable or ``STOCHCORR_PURE_PYTHON`` is set.

log_kv
    ``log K_nu(x)`` for scalar order and an array of arguments. The base
    order ``mu = nu - round(nu)`` is handled by Temme's series for x <= 2 and
    Steed's continued fraction CF2 for x > 2; higher orders come from the
    forward recurrence, which is stable for K, run on the ratio
    ``K_{m+1}/K_m`` so nothing overflows. Orders above ``DEBYE_MIN`` use the
    uniform (Debye) asymptotic expansion, exact to rounding there.
kdist_cdf
    CDF of the unit-variance normal scale mixture whose variance is
    Gamma(N/2, scale 2/N). The mixing integral is taken over ``u = log t``
    with the trapezoid rule, which converges geometrically for this analytic,
    rapidly decaying integrand.
"""

import math

import numpy as np
from scipy.special import erfc

EPS = 1e-16
MAXIT = 10000
X_SWITCH = 2.0
X_MIN = 1e-300
MAX_ORDER = 1e12
DEBYE_MIN = 1000.0

# 1/Gamma(1+x) = 1 + g x + D2 x^2 + D3 x^3 + D4 x^4 + D5 x^5 + ...
_EULER = 0.5772156649015329
_D3 = -0.0420026350340952
_D5 = -0.0421977345555443


def _temme_gammas(mu):
    gampl = 1.0 / math.gamma(1.0 + mu)
    gammi = 1.0 / math.gamma(1.0 - mu)
    gam2 = 0.5 * (gammi + gampl)
    if abs(mu) > 1e-3:
        gam1 = (gammi - gampl) / (2.0 * mu)
    else:
        mu2 = mu * mu
        gam1 = -(_EULER + _D3 * mu2 + _D5 * mu2 * mu2)
    return gam1, gam2, gampl, gammi


def _check_args(nu, x):
    if not math.isfinite(nu):
        raise ValueError("order must be finite")
    nu = abs(nu)
    if nu > MAX_ORDER:
        raise ValueError(f"order {nu} exceeds supported maximum {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("K_nu(x) requires x > 0")
    if np.any(x < X_MIN) or np.any(~np.isfinite(x)):
        raise ValueError(f"argument outside supported range [{X_MIN}, inf)")
    return nu, x


def _temme(mu, x):
    """log K_mu(x) and K_{mu+1}/K_mu for x <= 2, |mu| <= 1/2."""
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    small = np.abs(e) < 1e-8
    fact2 = np.where(small, 1.0, np.sinh(e) / np.where(small, 1.0, e))
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    active = np.arange(x.size)
    for i in range(1, MAXIT):
        ff_a = (i * ff[active] + p[active] + q[active]) / (i * i - mu * mu)
        c[active] *= dd[active] / i
        p[active] /= i - mu
        q[active] /= i + mu
        dl = c[active] * ff_a
        ff[active] = ff_a
        total[active] += dl
        total1[active] += c[active] * (p[active] - i * ff_a)
        active = active[np.abs(dl) >= np.abs(total[active]) * EPS]
        if active.size == 0:
            break
    else:  # pragma: no cover
        raise ArithmeticError("Temme series failed to converge")
    return np.log(total), (total1 / total) * (2.0 / x)


def _cf2(mu, x):
    """log K_mu(x) and K_{mu+1}/K_mu for x > 2, |mu| <= 1/2 (Steed's method)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu * mu
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.arange(x.size)
    for i in range(2, MAXIT):
        a -= 2 * (i - 1)
        c[active] = -a * c[active] / i
        qnew = (q1[active] - b[active] * q2[active]) / a
        q1[active] = q2[active]
        q2[active] = qnew
        q[active] += c[active] * qnew
        b[active] += 2.0
        d[active] = 1.0 / (b[active] + a * d[active])
        delh[active] = (b[active] * d[active] - 1.0) * delh[active]
        h[active] += delh[active]
        dels = q[active] * delh[active]
        s[active] += dels
        active = active[np.abs(dels) >= np.abs(s[active]) * EPS]
        if active.size == 0:
            break
    else:  # pragma: no cover
        raise ArithmeticError("CF2 failed to converge")
    h = a1 * h
    log_k = 0.5 * np.log(math.pi / (2.0 * x)) - np.log(s) - x
    return log_k, (mu + x + 0.5 - h) / x


def debye_log_kv(nu, x):
    """Uniform asymptotic expansion of ``log K_nu(nu z)`` through fourth order."""
    x = np.asarray(x, dtype=float)
    z = x / nu
    sq = np.hypot(1.0, z)
    p = 1.0 / sq
    p2 = p * p
    u1 = p * (3.0 - 5.0 * p2) / 24.0
    u2 = p2 * (81.0 + p2 * (-462.0 + 385.0 * p2)) / 1152.0
    u3 = p * p2 * (30375.0 + p2 * (-369603.0 + p2 * (765765.0 - 425425.0 * p2))) / 414720.0
    u4 = p2 * p2 * (4465125.0 + p2 * (-94121676.0 + p2 * (349922430.0 + p2 * (
        -446185740.0 + 185910725.0 * p2)))) / 39813120.0
    series = 1.0 - u1 / nu + u2 / nu**2 - u3 / nu**3 + u4 / nu**4
    eta = sq + np.log(z / (1.0 + sq))
    return (0.5 * math.log(math.pi / (2.0 * nu)) - nu * eta - 0.25 * np.log1p(z * z)
            + np.log(series))


def log_kv(nu, x):
    """``log K_nu(x)`` for scalar ``nu`` and array ``x``."""
    nu, x = _check_args(nu, x)
    if nu > DEBYE_MIN:
        return debye_log_kv(nu, x)
    shape = x.shape
    x = x.ravel()
    nl = int(nu + 0.5)
    mu = nu - nl
    out = np.empty_like(x)
    ratio = np.empty_like(x)
    lo = x <= X_SWITCH
    if np.any(lo):
        out[lo], ratio[lo] = _temme(mu, x[lo])
    if np.any(~lo):
        out[~lo], ratio[~lo] = _cf2(mu, x[~lo])
    for i in range(1, nl + 1):
        out += np.log(ratio)
        ratio = (mu + i) * (2.0 / x) + 1.0 / ratio
    if not np.all(np.isfinite(out)):
        raise OverflowError("log K_nu(x) not representable for the given order/argument")
    return out.reshape(shape)


# Gamma(k, 1) mass outside the lattice and the erfc cutoff are below 1e-17;
# lattice nodes whose weight is under _W_MIN are dropped.
_ERFC_CUT = 27.0
_TAIL = 1e-17
_W_MIN = 1e-25


def _log_gamma_density_const(k):
    """``k log k - k - lgamma(k)``, via Stirling's series once it is accurate."""
    if k < 100.0:
        return k * math.log(k) - k - math.lgamma(k)
    ik = 1.0 / k
    ik2 = ik * ik
    return (0.5 * math.log(k / (2.0 * math.pi))
            - ik * (1.0 / 12.0 - ik2 * (1.0 / 360.0 - ik2 * (1.0 / 1260.0 - ik2 / 1680.0))))


def kdist_lattice(n):
    """Shared trapezoid lattice for shape ``k = n/2``.

    The mixing variance ``t ~ Gamma(k, 1)`` is written ``t = k exp(v)``;
    nodes are ``v_hi - j*h``, returned in increasing order. Returns
    ``(h, w, s)`` with ``w`` the density of ``v`` at the nodes and
    ``s = exp(-v/2) / sqrt(2)`` so the upper tail probability of the
    conditional normal at a node is ``erfc(|r| * s) / 2``.
    """
    k = 0.5 * n
    h = min(0.2, 0.4 / math.sqrt(k))
    v_hi = math.log1p((12.0 * math.sqrt(k) + 40.0) / k)
    v_lo = (math.log(_TAIL) + math.lgamma(k + 1.0)) / k - math.log(k)
    count = int(math.ceil((v_hi - v_lo) / h)) + 1
    v = v_hi - h * np.arange(count)[::-1]
    # k*(1 + v - e^v) computed without cancellation
    w = np.exp(-k * (np.expm1(v) - v) + _log_gamma_density_const(k))
    keep = w >= _W_MIN
    v, w = v[keep], w[keep]
    return h, w, np.exp(-0.5 * v) / math.sqrt(2.0)


def kdist_cdf(n, r, block=2048):
    """CDF of the unit-variance K-distribution with shape parameter ``n``."""
    if not n > 0:
        raise ValueError("shape parameter must be positive")
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = r.ravel()
    out = np.full(r.shape, 0.5)
    h, w, s = kdist_lattice(n)
    a = np.abs(r)
    nz = np.flatnonzero(a > 0)
    inf = nz[np.isinf(a[nz])]
    out[inf] = np.where(r[inf] > 0, 1.0, 0.0)
    fin = nz[np.isfinite(a[nz])]
    order = fin[np.argsort(a[fin])]
    for start in range(0, order.size, block):
        idx = order[start:start + block]
        ai = a[idx]
        # nodes where every argument in the block exceeds the cutoff contribute nothing
        first = int(np.searchsorted(-s, -_ERFC_CUT / ai[0], side="left"))
        upper = 0.5 * h * (erfc(ai[:, None] * s[None, first:]) @ w[first:])
        out[idx] = np.where(r[idx] > 0, 1.0 - upper, upper)
    return out.reshape(shape)

"""Bessel K and K-distribution CDF kernels, for every available backend.

Reference values were computed with mpmath at 30 digits (``besselk`` and
quadrature of the chi-square mixture) and frozen here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from stochcorr import _backend
from stochcorr._kernels_py import DEBYE_MIN, debye_log_kv

BESSEL_REF = [
    (0.0, 1.0, 0.42102443824070833),
    (0.5, 2.5, 0.065065943154009989),
    (1.0, 0.1, 9.8538447808706056),
    (2.5, 7.0, 0.00064354115448130757),
    (10.0, 3.0, 2459.6204220569468),
    (0.3, 1e-5, 58.178619126715331),
    (37.2, 50.0, 1.8014039103981817e-17),
    (100.0, 500.0, 8.4258768687230154e-215),
    (0.75, 2.0, 0.12790297862917903),
    (5.0, 1e-3, 3.8399997600000096e17),
]

LOG_K_1E5 = [(0.5, -100005.53067137984), (3.0, -100005.53062763006), (50.0, -100005.51817269259)]

CDF_REF = [
    (2.0, 0.7, 0.81420227076288062),
    (3.9, -1.3, 0.085227816694209556),
    (3.9, 0.05, 0.52513371914341062),
    (12.0, 2.5, 0.99134627183450794),
    (50.0, -4.0, 7.1779417222163461e-5),
    (1.5, 3.0, 0.99173735470328555),
    (1.05, -8.0, 3.9088293569131102e-5),
]


@pytest.mark.parametrize("nu,x,ref", BESSEL_REF)
def test_log_kv_reference(kernels, nu, x, ref):
    assert kernels.log_kv(nu, np.array([x]))[0] == pytest.approx(math.log(ref), rel=1e-13, abs=1e-12)


def test_k0_integral_oracle(kernels):
    # K_0(1) = int_0^inf exp(-cosh t) dt; the integrand is below 1e-300 past t = 30
    ref = quad(lambda t: math.exp(-math.cosh(t)), 0, 30.0, epsabs=0, epsrel=1e-13)[0]
    assert math.exp(kernels.log_kv(0.0, np.array([1.0]))[0]) == pytest.approx(ref, rel=1e-12)


def test_half_order_closed_form(kernels):
    x = np.geomspace(1e-6, 700, 200)
    ref = np.sqrt(np.pi / (2 * x)) * np.exp(-x)
    np.testing.assert_allclose(np.exp(kernels.log_kv(0.5, x)), ref, rtol=1e-12)


@pytest.mark.parametrize("nu,ref", LOG_K_1E5)
def test_log_variant_at_large_argument(kernels, nu, ref):
    assert kernels.log_kv(nu, np.array([1e5]))[0] == pytest.approx(ref, rel=1e-14)


def test_debye_matches_recurrence_at_switch(kernels):
    # at exactly DEBYE_MIN log_kv still runs the recurrence
    x = np.array([1e-3, 1.0, 100.0, 1e3, 1e4])
    np.testing.assert_allclose(kernels.log_kv(DEBYE_MIN, x), debye_log_kv(DEBYE_MIN, x), rtol=1e-13)


def test_negative_order_symmetry(kernels):
    x = np.array([0.3, 3.0])
    np.testing.assert_array_equal(kernels.log_kv(-2.7, x), kernels.log_kv(2.7, x))


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf, 1e-310])
def test_log_kv_rejects_arguments(kernels, bad):
    with pytest.raises(ValueError):
        kernels.log_kv(1.0, np.array([bad]))


def test_log_kv_stays_finite_where_k_overflows(kernels):
    from stochcorr.dist import bessel_k
    assert np.isfinite(kernels.log_kv(500.0, np.array([1e-300]))[0])
    with pytest.raises(OverflowError):
        bessel_k(500.0, 1e-300)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(0.0, 100.0), x=st.floats(1e-6, 500.0))
def test_recurrence_residual(nu, x):
    # K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu, checked in scaled form
    lk = [_backend.log_kv(nu + d, np.array([x]))[0] for d in (-1.0, 0.0, 1.0)]
    top = lk[2]
    resid = math.exp(lk[0] - top) + (2 * nu / x) * math.exp(lk[1] - top) - 1.0
    assert abs(resid) < 1e-9


@pytest.mark.parametrize("n,r,ref", CDF_REF)
def test_cdf_reference(kernels, n, r, ref):
    assert kernels.kdist_cdf(n, np.array([r]))[0] == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_cdf_special_points(kernels):
    out = kernels.kdist_cdf(3.0, np.array([0.0, np.inf, -np.inf, 60.0, -60.0]))
    np.testing.assert_array_equal(out[:3], [0.5, 1.0, 0.0])
    assert out[3] == 1.0 and 0.0 <= out[4] < 1e-20


def test_cdf_gaussian_limit(kernels):
    from scipy.special import ndtr
    r = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(kernels.kdist_cdf(1e6, r), ndtr(r), atol=1e-5)


def test_cdf_is_monotone_and_symmetric(kernels):
    r = np.linspace(-10, 10, 2001)
    f = kernels.kdist_cdf(3.9, r)
    assert np.all(np.diff(f) >= 0)
    np.testing.assert_allclose(f + f[::-1], 1.0, atol=1e-15)


def test_backends_agree():
    impls = _backend.implementations()
    if len(impls) < 2:
        pytest.skip("compiled extension not built")
    py, c = impls["python"], impls["compiled"]
    x = np.geomspace(1e-8, 700, 300)
    for nu in (0.0, 0.4, 1.45, 7.5, 150.0, 2000.0):
        np.testing.assert_allclose(c.log_kv(nu, x), py.log_kv(nu, x), rtol=1e-12, atol=1e-12)
    r = np.linspace(-12, 12, 501)
    for n in (1.05, 3.9, 50.0, 1e4):
        np.testing.assert_allclose(c.kdist_cdf(n, r), py.kdist_cdf(n, r), rtol=1e-13, atol=1e-15)


def test_backend_is_reported():
    assert _backend.BACKEND in ("compiled", "python")


def test_accuracy_grid_against_scipy(kernels):
    # scipy's kve is an independent implementation; compare in log space
    from scipy.special import kve
    x = np.geomspace(1e-8, 700, 120)
    for nu in np.linspace(0, 200, 41):
        ref = kve(nu, x)
        ok = np.isfinite(ref) & (ref > 0) & (ref < 1e300)
        lk = kernels.log_kv(nu, x[ok])
        np.testing.assert_allclose(lk, np.log(ref[ok]) - x[ok], rtol=1e-10 / 50, atol=1e-10)


def test_extreme_order_is_an_error(kernels):
    with pytest.raises(ValueError, match="order"):
        kernels.log_kv(1e13, np.array([1.0]))

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from conftest import series_bessel_i
from hdmr.manifold import fibonacci_sphere, super_fibonacci, sphere_area
from hdmr.specfn import bessel_ratio, bessel_ratio_deriv, inv_bessel_ratio, log_bessel_i, vmf_log_norm


def test_log_bessel_i0_at_zero():
    assert log_bessel_i(0, 0.0) == 0.0


def test_log_bessel_half_order_closed_form():
    expected = math.log(math.sqrt(2.0 / math.pi) * math.sinh(1.0))
    assert log_bessel_i(0.5, 1.0) == pytest.approx(expected, rel=1e-14)
    assert math.exp(log_bessel_i(0.5, 1.0)) == pytest.approx(series_bessel_i(0.5, 1.0), rel=1e-13)


def test_log_bessel_order_one_matches_series():
    assert math.exp(log_bessel_i(1, 2.0)) == pytest.approx(series_bessel_i(1, 2.0), rel=1e-13)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0, 2.5])
@pytest.mark.parametrize("x", [0.01, 0.7, 5.0, 19.9, 20.1, 35.0, 50.0])
def test_log_bessel_matches_series_up_to_50(nu, x):
    ref = series_bessel_i(nu, x, terms=200)
    assert math.exp(log_bessel_i(nu, x)) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0])
@pytest.mark.parametrize("x", [100.0, 500.0, 1e4])
def test_log_bessel_large_argument_no_overflow(nu, x):
    ref = math.log(special.ive(nu, x)) + x
    assert log_bessel_i(nu, x) == pytest.approx(ref, rel=1e-13)


def test_log_bessel_vectorized():
    xs = np.array([0.5, 3.0, 40.0])
    out = log_bessel_i(1.0, xs)
    assert out.shape == (3,)
    assert out[2] == pytest.approx(log_bessel_i(1.0, 40.0))


def test_log_bessel_domain_errors():
    with pytest.raises(ValueError):
        log_bessel_i(1.0, -1.0)
    with pytest.raises(ValueError):
        log_bessel_i(-1.0, 1.0)


def test_ratio_values():
    assert bessel_ratio(3, 0.0) == 0.0
    assert bessel_ratio(3, 1.0) == pytest.approx(1.0 / math.tanh(1.0) - 1.0, rel=1e-13)
    ref = series_bessel_i(2, 10.0, 200) / series_bessel_i(1, 10.0, 200)
    a = bessel_ratio(4, 10.0)
    assert 0.0 < a < 1.0
    assert a == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_ratio_monotone_below_one(d):
    lam = np.linspace(0.0, 500.0, 1000)
    a = np.array([bessel_ratio(d, x) for x in lam])
    assert np.all(np.diff(a) > 0)
    assert a[0] == 0.0 and a[-1] < 1.0


def test_ratio_deriv_values():
    A = 1.0 / math.tanh(1.0) - 1.0
    assert bessel_ratio_deriv(3, 1.0) == pytest.approx(1.0 - A * A - 2.0 * A, rel=1e-12)
    assert bessel_ratio_deriv(3, 1.0) == pytest.approx(0.2759383390, abs=1e-9)
    assert bessel_ratio_deriv(5, 0.001) == pytest.approx(0.2, abs=1e-3)
    with pytest.raises(ValueError):
        bessel_ratio_deriv(3, 0.0)
    assert bessel_ratio_deriv(4, 0.0, limit_at_zero=True) == pytest.approx(0.25)


@pytest.mark.parametrize("d", [3, 4, 5])
@pytest.mark.parametrize("lam", [0.01, 0.1, 1.0, 7.5, 30.0, 100.0])
def test_ratio_deriv_matches_fd(d, lam):
    h = 1e-6 * max(1.0, lam)
    fd = (bessel_ratio(d, lam + h) - bessel_ratio(d, lam - h)) / (2 * h)
    assert bessel_ratio_deriv(d, lam) == pytest.approx(fd, rel=1e-6)


def test_inverse_examples():
    assert inv_bessel_ratio(3, 0.0) == 0.0
    assert inv_bessel_ratio(3, bessel_ratio(3, 5.0)) == pytest.approx(5.0, abs=1e-8)
    lam = inv_bessel_ratio(4, 0.8)
    assert abs(bessel_ratio(4, lam) - 0.8) <= 1e-10
    for bad in (1.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            inv_bessel_ratio(3, bad)


@settings(max_examples=60, deadline=None)
@given(d=st.sampled_from([3, 4, 5]), lam=st.floats(1e-3, 500.0))
def test_inverse_round_trip(d, lam):
    assert inv_bessel_ratio(d, bessel_ratio(d, lam)) == pytest.approx(lam, rel=1e-8, abs=1e-8)


def test_vmf_log_norm_values():
    assert vmf_log_norm(3, 1.0) == pytest.approx(math.log(1.0 / (4 * math.pi * math.sinh(1.0))), rel=1e-13)
    assert vmf_log_norm(3, 1e-6) == pytest.approx(math.log(1.0 / (4 * math.pi)), abs=1e-6)
    with pytest.raises(ValueError):
        vmf_log_norm(3, 0.0)


@pytest.mark.parametrize("lam", [1.0, 10.0, 50.0])
def test_vmf_density_integrates_to_one_on_s2(lam):
    pts = fibonacci_sphere(20000)
    mu = np.array([0.3, -0.4, np.sqrt(0.75)])
    dens = np.exp(vmf_log_norm(3, lam) + lam * (mu @ pts))
    assert dens.mean() * sphere_area(3) == pytest.approx(1.0, abs=1e-3)


def test_vmf_density_integrates_to_one_on_s3():
    pts = super_fibonacci(200000)
    mu = np.array([0.0, 0.0, 0.6, 0.8])
    dens = np.exp(vmf_log_norm(4, 2.0) + 2.0 * (mu @ pts))
    assert dens.mean() * sphere_area(4) == pytest.approx(1.0, abs=1e-3)

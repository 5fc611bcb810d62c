"""Modified Bessel I and K in log space: mpmath agreement, closed forms,
Wronskian consistency, and scaling behaviour far outside float range."""

import math

import numpy as np
import pytest

import oracles
from rkl.bessel import (ORDER_MAX_INTERNAL, ORDER_MAX_PUBLIC, bessel_i_scaled,
                        bessel_k_scaled, log_i, log_k, product_ik,
                        wronskian_defect)
from rkl.errors import DomainError

# arguments straddling every internal region switch (series / tanh-sinh
# integral / asymptotic), plus deep tails on both sides
_X = np.array([1e-6, 1e-3, 0.05, 0.4, 1.0, 2.0, 7.9, 8.1, 14.9, 15.1,
               29.0, 31.0, 80.0, 300.0, 700.0, 5000.0])
_NU = [0.0, 0.25, 0.5, 1.0, 1.75, 2.5, 3.3, 4.0]


@pytest.mark.parametrize("nu", _NU)
def test_log_i_matches_mpmath(nu):
    lv, rel = log_i(nu, _X)
    for x, got, r in zip(_X, lv, rel):
        ref = oracles.log_iv(nu, float(x))
        assert got == pytest.approx(ref, abs=max(3 * r, 1e-13) + 1e-13), x
        assert r < 1e-9


@pytest.mark.parametrize("nu", _NU)
def test_log_k_matches_mpmath(nu):
    lv, rel = log_k(nu, _X)
    for x, got, r in zip(_X, lv, rel):
        ref = oracles.log_kv(nu, float(x))
        assert got == pytest.approx(ref, abs=max(3 * r, 1e-13) + 1e-13), x
        assert r < 1e-9


def test_internal_orders_above_public_cap():
    # derivative tables shift orders upward; the raw routines must accept
    # orders up to 8.75 even though the scalar wrappers refuse them
    lv, rel = log_i(8.5, np.array([0.3, 3.0, 40.0]))
    for x, got, r in zip([0.3, 3.0, 40.0], lv, rel):
        assert got == pytest.approx(oracles.log_iv(8.5, x), abs=1e-11)
    lv, rel = log_k(ORDER_MAX_INTERNAL, np.array([0.3, 3.0, 40.0]))
    for x, got in zip([0.3, 3.0, 40.0], lv):
        assert got == pytest.approx(oracles.log_kv(ORDER_MAX_INTERNAL, x),
                                    abs=1e-11)


def test_half_integer_closed_forms():
    # I_{1/2}(x) = sqrt(2/(pi x)) sinh x ; K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
    for x in (0.2, 1.0, 5.0, 50.0):
        li, _ = log_i(0.5, np.array([x]))
        ref_i = 0.5 * math.log(2.0 / (math.pi * x)) + x + math.log1p(
            -math.exp(-2.0 * x)) - math.log(2.0)
        assert float(li[0]) == pytest.approx(ref_i, abs=1e-13)
        lk, _ = log_k(0.5, np.array([x]))
        ref_k = 0.5 * math.log(math.pi / (2.0 * x)) - x
        assert float(lk[0]) == pytest.approx(ref_k, abs=1e-13)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 2.25, 4.0])
@pytest.mark.parametrize("x", [1e-4, 0.1, 1.0, 10.0, 200.0, 3000.0])
def test_wronskian_defect_small_everywhere(nu, x):
    assert abs(wronskian_defect(nu, x)) < 1e-9


def test_scaled_wrappers_cover_extreme_arguments():
    # I_1(700) ~ 1e302, K_1(700) ~ 1e-306: both in float range but their
    # product at x=1400 is not; the scaled forms must stay exact
    big = bessel_i_scaled(1.0, 1400.0)
    small = bessel_k_scaled(1.0, 1400.0)
    assert big.value.log_abs > 700.0 * math.log(math.e)
    assert small.value.log_abs < -700.0
    assert big.value.log_abs == pytest.approx(oracles.log_iv(1.0, 1400.0),
                                              abs=1e-10)
    assert small.value.log_abs == pytest.approx(oracles.log_kv(1.0, 1400.0),
                                                abs=1e-10)


def test_product_ik_matches_mpmath_at_extremes():
    cases = [(0.5, 0.01, 2000.0), (2.0, 1.0, 1.0), (1.3, 5.0, 6.0),
             (0.0, 1e-5, 1e-5), (4.5, 800.0, 900.0)]
    for t, x, y in cases:
        got = product_ik(t, x, y)
        ref = oracles.mp.log(oracles.iv(t, x) * oracles.kv(t, y))
        assert got.log_abs == pytest.approx(float(ref), abs=1e-9), (t, x, y)
        assert got.sign == 1.0


def test_product_ik_no_overflow_on_huge_imbalance():
    # I alone overflows a float here; the scaled product must not
    v = product_ik(1.0, 5000.0, 5000.0)
    ref = oracles.mp.log(oracles.iv(1.0, 5000.0) * oracles.kv(1.0, 5000.0))
    assert v.log_abs == pytest.approx(float(ref), abs=1e-9)


def test_public_order_cap_enforced():
    with pytest.raises(DomainError):
        bessel_i_scaled(ORDER_MAX_PUBLIC + 0.5, 1.0)
    with pytest.raises(DomainError):
        bessel_k_scaled(-0.01, 1.0)
    with pytest.raises(DomainError):
        product_ik(ORDER_MAX_INTERNAL + 0.25, 1.0, 1.0)


@pytest.mark.parametrize("x", [0.0, -2.0, math.inf, math.nan])
def test_argument_domain(x):
    with pytest.raises(DomainError):
        bessel_k_scaled(1.0, x)


def test_no_upper_argument_limit():
    # far beyond any asymptotic switch; log forms must remain finite
    lv, rel = log_k(2.0, np.array([1e6]))
    assert math.isfinite(float(lv[0]))
    assert float(lv[0]) == pytest.approx(oracles.log_kv(2.0, 1e6), rel=1e-12)

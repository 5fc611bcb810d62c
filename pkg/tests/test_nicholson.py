"""The oscillatory-integral route for I_t(x) K_t(y): dual-route agreement
with the direct log-space product, and honest refusal outside its territory."""

import pytest

import oracles
from rkl.bessel import product_ik, product_ik_nicholson
from rkl.errors import ConvergenceFailure, DomainError


@pytest.mark.parametrize(
    "t, x, y",
    [
        (0.0, 0.5, 2.0),
        (0.25, 0.1, 1.0),
        (0.5, 1.0, 3.0),
        (1.0, 2.0, 6.0),
        (1.5, 0.01, 0.5),
        (2.0, 3.0, 10.0),
        (0.4, 0.2, 25.0),
    ],
)
def test_agrees_with_direct_product(t, x, y):
    osc = product_ik_nicholson(t, x, y)
    direct = product_ik(t, x, y)
    assert osc.log_abs == pytest.approx(direct.log_abs, abs=5e-8)
    assert osc.sign == direct.sign == 1.0


def test_agrees_with_mpmath():
    t, x, y = 0.75, 0.8, 4.0
    got = product_ik_nicholson(t, x, y)
    ref = oracles.mp.log(oracles.iv(t, x) * oracles.kv(t, y))
    assert got.log_abs == pytest.approx(float(ref), abs=1e-8)


def test_refuses_nearly_equal_arguments():
    # a/b ~ 2*sqrt(xy)/(y-x) panels: diverges as y -> x
    with pytest.raises(ConvergenceFailure, match="panels"):
        product_ik_nicholson(1.0, 10.0, 10.0001)


def test_panel_budget_is_configurable():
    # feasible with the default budget, infeasible with a tiny one
    product_ik_nicholson(1.0, 2.0, 6.0)
    with pytest.raises(ConvergenceFailure):
        product_ik_nicholson(1.0, 2.0, 6.0, max_panels=4)


def test_requires_ordered_arguments():
    with pytest.raises(DomainError):
        product_ik_nicholson(1.0, 3.0, 2.0)
    with pytest.raises(DomainError):
        product_ik_nicholson(1.0, 2.0, 2.0)


def test_order_cap_is_two():
    with pytest.raises(DomainError):
        product_ik_nicholson(2.5, 1.0, 2.0)

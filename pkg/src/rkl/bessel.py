"""Bessel evaluators: J_nu, I_nu, K_nu and the I*K product routes.

Each function is computed in three regimes:

* ascending power series for small argument,
* tanh-sinh quadrature of the classical integral representations in the
  middle band (I up to 30 when the series bound is passed, K on all of
  (0, 30]),
* Hankel-type asymptotic expansions beyond x = 30 (x = 12 for J).

The vectorized internals ``log_i`` / ``log_k`` return natural logs so kernel
code can work arbitrarily far into the exponential tails; ``j_values``
returns plain floats (J is bounded).  Public wrappers accept orders in
[0, 4]; internally orders up to ORDER_MAX_INTERNAL are supported because
kernel derivative tables shift the order upward.

K is evaluated through its cosh-integral representation on all of (0, 30]
rather than through the I_{-nu} reflection series: the reflected difference
cancels catastrophically near integer orders at moderate argument, while the
integral representation is uniformly stable.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceFailure, DomainError
from .gammafn import log_gamma
from .quadrature import coshm1, de_quad, de_quad_rows, gauss_legendre
from .scaled import EvalResult, ScaledValue

__all__ = [
    "ORDER_MAX_PUBLIC",
    "ORDER_MAX_INTERNAL",
    "bessel_j",
    "bessel_i_scaled",
    "bessel_k_scaled",
    "product_ik",
    "product_ik_nicholson",
    "wronskian_defect",
    "log_i",
    "log_k",
    "j_values",
]

ORDER_MAX_PUBLIC = 4.0
#: kernel derivative tables shift orders upward by the derivative count
ORDER_MAX_INTERNAL = 8.75

_LN2 = math.log(2.0)
_EPS = 2.22e-16


def _check_order(nu: float, cap: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < 0.0 or nu > cap:
        raise DomainError(f"order {nu!r} outside [0, {cap}]")
    return nu


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"argument {x!r} outside (0, inf)")
    return x


# ---------------------------------------------------------------------------
# I_nu
# ---------------------------------------------------------------------------

def _log_i_series(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log I_nu by the ascending series; all terms positive."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    s = np.ones_like(x)
    for k in range(400):
        term = term * q / ((k + 1.0) * (nu + k + 1.0))
        s += term
        if np.all(term <= 1e-17 * s):
            break
    logv = nu * np.log(0.5 * x) - log_gamma(nu + 1.0) + np.log(s)
    rel = np.maximum(term / s, 4.0 * _EPS)
    return logv, rel


def _log_i_de(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log I_nu via its sin-power integral representation (Poisson form)."""
    def f(phi):
        # e^{-x(1+cos phi)} sin^{2 nu} phi ; 1+cos = 2 cos^2(phi/2)
        c = 2.0 * np.cos(0.5 * phi) ** 2
        return np.exp(-x[:, None] * c) * np.sin(phi) ** (2.0 * nu)

    val, err = de_quad_rows(f, 0.0, np.full(x.shape, math.pi),
                            rel_tol=4e-14, max_level=7)
    logc = (nu * np.log(x) - nu * _LN2 - 0.5 * math.log(math.pi)
            - log_gamma(nu + 0.5))
    logv = x + logc + np.log(val)
    rel = np.maximum(err / val, 4.0 * _EPS)
    return logv, rel


def _asym_sums(nu: float, x: np.ndarray, alternating: bool
               ) -> tuple[np.ndarray, np.ndarray]:
    """Hankel asymptotic sum for I (alternating) or K (plain).

    Terms a_k = prod_j (4 nu^2 - (2j-1)^2) / (k! (8x)^k); summation stops at
    the smallest term per element (optimal truncation).
    """
    fournu2 = 4.0 * nu * nu
    term = np.ones_like(x)
    s = np.ones_like(x)
    best = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 40):
        nxt = term * (fournu2 - (2.0 * k - 1.0) ** 2) / (8.0 * k * x)
        grew = np.abs(nxt) >= np.abs(term)
        stop = active & grew & (k > 1)
        active &= ~stop
        term = np.where(active, nxt, term)
        s = np.where(active, s + (nxt if not alternating else
                                  nxt * ((-1.0) ** k)), s)
        best = np.where(active, np.minimum(best, np.abs(nxt)), best)
        if not active.any() or np.all(best <= 1e-17 * np.abs(s)):
            break
    rel = np.maximum(best / np.abs(s), 4.0 * _EPS)
    return s, rel


def _log_i_asym(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s, rel = _asym_sums(nu, x, alternating=True)
    logv = x - 0.5 * np.log(2.0 * math.pi * x) + np.log(s)
    return logv, rel


def _log_k_de(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log K_nu via its sinh-power cosh-decay integral representation."""
    # truncation: walk a coarse log-integrand profile out to 55 e-folds
    # below its per-row maximum
    theta = np.linspace(1e-4, 60.0, 481)
    with np.errstate(over="ignore"):
        prof = (2.0 * nu * np.log(np.sinh(theta))[None, :]
                - x[:, None] * coshm1(theta)[None, :])
    peak = prof.max(axis=1)
    below = prof <= (peak[:, None] - 55.0)
    past_peak = np.arange(prof.shape[1])[None, :] > prof.argmax(axis=1)[:, None]
    cut_idx = np.where(below & past_peak, 1, 0).argmax(axis=1)
    cut = np.where(cut_idx > 0, theta[cut_idx], theta[-1])

    def f(th):
        return (np.sinh(th) ** (2.0 * nu)
                * np.exp(-x[:, None] * coshm1(th)))

    val, err = de_quad_rows(f, 0.0, cut, rel_tol=4e-14, max_level=7)
    logc = (0.5 * math.log(math.pi) + nu * np.log(x) - nu * _LN2
            - log_gamma(nu + 0.5))
    logv = -x + logc + np.log(val)
    rel = np.maximum(err / val, 4.0 * _EPS)
    return logv, rel


def _log_k_asym(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s, rel = _asym_sums(nu, x, alternating=False)
    logv = -x + 0.5 * np.log(0.5 * math.pi / x) + np.log(s)
    return logv, rel


def log_i(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log I_nu(x), relative error) for an array of x > 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    rel = np.empty_like(x)
    series_bound = max(10.0, 2.0 * nu)
    m1 = x <= series_bound
    m3 = x > 30.0
    m2 = ~m1 & ~m3
    if m1.any():
        out[m1], rel[m1] = _log_i_series(nu, x[m1])
    if m2.any():
        out[m2], rel[m2] = _log_i_de(nu, x[m2])
    if m3.any():
        out[m3], rel[m3] = _log_i_asym(nu, x[m3])
    # a value carried as exp(log) inherits the log's representation error
    rel += _EPS * np.abs(out)
    return out, rel


def log_k(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log K_nu(x), relative error) for an array of x > 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    rel = np.empty_like(x)
    m2 = x > 30.0
    m1 = ~m2
    if m1.any():
        out[m1], rel[m1] = _log_k_de(nu, x[m1])
    if m2.any():
        out[m2], rel[m2] = _log_k_asym(nu, x[m2])
    rel += _EPS * np.abs(out)
    return out, rel


# ---------------------------------------------------------------------------
# J_nu
# ---------------------------------------------------------------------------

def _j_series(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = 0.25 * x * x
    term = np.ones_like(x)
    s = np.ones_like(x)
    tmax = np.ones_like(x)
    for k in range(220):
        term = -term * q / ((k + 1.0) * (nu + k + 1.0))
        s += term
        tmax = np.maximum(tmax, np.abs(term))
        if np.all(np.abs(term) <= 1e-18 * tmax):
            break
    with np.errstate(divide="ignore", over="ignore"):
        pref = np.exp(nu * np.log(0.5 * x) - log_gamma(nu + 1.0))
    vals = pref * s
    abs_err = pref * (4.0 * _EPS * tmax + np.abs(term))
    return vals, abs_err


def _j_hankel(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fournu2 = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    best = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, 40):
        nxt = term * (fournu2 - (2.0 * m - 1.0) ** 2) / (8.0 * m * x)
        grew = np.abs(nxt) >= np.abs(term)
        stop = active & grew & (m > 1)
        active &= ~stop
        nxt = np.where(active, nxt, 0.0)
        sign = (-1.0) ** (m // 2)
        if m % 2:
            q = q + sign * nxt
        else:
            p = p + sign * nxt
        term = np.where(active, nxt, term)
        best = np.where(active, np.minimum(best, np.abs(nxt)), best)
        if not active.any():
            break
        if np.all(best <= 1e-17):
            break
    amp = np.sqrt(2.0 / (math.pi * x))
    om = x - (0.5 * nu + 0.25) * math.pi
    vals = amp * (np.cos(om) * p - np.sin(om) * q)
    abs_err = amp * (best + _EPS * x * (np.abs(p) + np.abs(q)))
    return vals, abs_err


def j_values(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(J_nu(x), absolute error) for an array of x > 0."""
    x = np.asarray(x, dtype=float)
    vals = np.empty_like(x)
    err = np.empty_like(x)
    m1 = x <= 12.0
    if m1.any():
        vals[m1], err[m1] = _j_series(nu, x[m1])
    if (~m1).any():
        vals[~m1], err[~m1] = _j_hankel(nu, x[~m1])
    return vals, err


# ---------------------------------------------------------------------------
# public scalar wrappers
# ---------------------------------------------------------------------------

def bessel_j(nu: float, x: float) -> EvalResult:
    """J_nu(x) with an error estimate; nu in [0, 4], x > 0."""
    nu = _check_order(nu, ORDER_MAX_PUBLIC)
    x = _check_x(x)
    v, aerr = j_values(nu, np.array([x]))
    val = ScaledValue.from_float(float(v[0]))
    rel = float(aerr[0] / abs(v[0])) if v[0] != 0.0 else math.inf
    return EvalResult(val, rel)


def bessel_i_scaled(nu: float, x: float) -> EvalResult:
    """I_nu(x) carried as a ScaledValue; nu in [0, 4], x > 0."""
    nu = _check_order(nu, ORDER_MAX_PUBLIC)
    x = _check_x(x)
    lv, rel = log_i(nu, np.array([x]))
    return EvalResult(ScaledValue.from_log(float(lv[0])), float(rel[0]))


def bessel_k_scaled(nu: float, x: float) -> EvalResult:
    """K_nu(x) carried as a ScaledValue; nu in [0, 4], x > 0."""
    nu = _check_order(nu, ORDER_MAX_PUBLIC)
    x = _check_x(x)
    lv, rel = log_k(nu, np.array([x]))
    return EvalResult(ScaledValue.from_log(float(lv[0])), float(rel[0]))


def product_ik(t: float, x: float, y: float) -> ScaledValue:
    """I_t(x) * K_t(y) as a ScaledValue (no overflow anywhere in range)."""
    t = _check_order(t, ORDER_MAX_INTERNAL)
    x = _check_x(x)
    y = _check_x(y)
    li, _ = log_i(t, np.array([x]))
    lk, _ = log_k(t, np.array([y]))
    return ScaledValue.from_log(float(li[0] + lk[0]))


def wronskian_defect(nu: float, x: float) -> float:
    """x*(I_nu K_{nu+1} + I_{nu+1} K_nu) - 1; zero in exact arithmetic."""
    nu = _check_order(nu, ORDER_MAX_PUBLIC)
    x = _check_x(x)
    xa = np.array([x])
    li0, _ = log_i(nu, xa)
    li1, _ = log_i(nu + 1.0, xa)
    lk0, _ = log_k(nu, xa)
    lk1, _ = log_k(nu + 1.0, xa)
    a = ScaledValue.from_log(float(li0[0] + lk1[0]))
    b = ScaledValue.from_log(float(li1[0] + lk0[0]))
    return float((a + b) * x) - 1.0


# ---------------------------------------------------------------------------
# Nicholson-type oscillatory product route
# ---------------------------------------------------------------------------

def product_ik_nicholson(t: float, x: float, y: float, *,
                         rel_tol: float = 1e-9,
                         max_panels: int = 4096) -> ScaledValue:
    """I_t(x) K_t(y) for 0 < x < y through the oscillatory J-transform

        integral_0^inf J_{2t}(a s) e^{-b sqrt(1+s^2)} ds / sqrt(1+s^2)

    with a = 2 sqrt(xy), b = y - x.  The integrand oscillates on scale 1/a
    and decays on scale 1/b, so the panel count grows like a/b; the route is
    a cross-check for well-separated arguments and deliberately refuses
    (ConvergenceFailure) when the oscillation budget would be exceeded,
    which happens once y - x gets small.
    """
    t = _check_order(t, 2.0)
    x = _check_x(x)
    y = _check_x(y)
    if not x < y:
        raise DomainError(
            f"nicholson route requires x < y, got x={x!r} y={y!r}")
    a = 2.0 * math.sqrt(x * y)
    b = y - x

    # truncate where the exponential has decayed 55 e-folds past its start
    smax = math.sqrt((1.0 + 55.0 / b) ** 2 - 1.0)
    width = min(math.pi / (2.0 * a), 0.5)
    n_panels = max(8, int(math.ceil(smax / width)))
    if n_panels > max_panels:
        raise ConvergenceFailure(
            f"nicholson route needs {n_panels} oscillation panels for "
            f"a={a:.3g}, b={b:.3g} (budget {max_panels}); "
            f"y - x is too small for this representation")

    edges = np.linspace(0.0, smax, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1] - edges[0])

    def integrand(s: np.ndarray) -> np.ndarray:
        r = np.sqrt(1.0 + s * s)
        jv, _ = j_values(2.0 * t, a * s)
        return jv * np.exp(-b * r) / r

    # the J factor behaves like s^{2t} at the origin, so the first panel is
    # integrated by tanh-sinh (algebraic endpoint singularity); the remaining
    # panels are smooth quarter-oscillations handled by a GL pair
    head, head_err = de_quad(integrand, 0.0, float(edges[1]), rel_tol=1e-13)

    def rule(order: int) -> float:
        xs, ws = gauss_legendre(order)
        s = (mid[1:, None] + half * xs[None, :]).ravel()
        f = integrand(s)
        return float(f @ (half * np.broadcast_to(ws, (n_panels - 1, order))
                          ).ravel())

    i10 = rule(10)
    i20 = rule(20)
    val = head + i20
    err = abs(i20 - i10) + head_err
    if not err <= rel_tol * max(abs(val), 1e-300):
        raise ConvergenceFailure(
            f"nicholson route error estimate {err:.3g} exceeds "
            f"tol {rel_tol:.3g} * |{val:.6g}|",
            estimate=val, error=err)
    return ScaledValue.from_float(val)

"""Quadrature engines: tanh-sinh, composite Gauss-Legendre, adaptive Gauss-Kronrod.

All drivers evaluate the integrand on whole node arrays at once so callers can
vectorize over batches of integrals (each row its own interval) and over
vector-valued integrands.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConvergenceFailure

__all__ = [
    "gauss_legendre",
    "composite_gl",
    "de_quad",
    "de_quad_rows",
    "adaptive_gauss_kronrod",
    "coshm1",
]


def coshm1(x):
    """cosh(x) - 1 computed without cancellation near 0."""
    s = np.sinh(np.asarray(x) / 2.0)
    return 2.0 * s * s


# ---------------------------------------------------------------------------
# Gauss-Legendre
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; cached and marked read-only."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gl(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                 panels: int, order: int = 12) -> np.ndarray | float:
    """Fixed composite Gauss-Legendre rule with equal panels.

    ``f`` receives one flat array of every node and returns either the same
    shape (scalar integrand) or ``(..., M)`` for vector-valued integrands.
    """
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + half * x[None, :]).ravel()
    weights = (half * np.broadcast_to(w, (panels, order))).ravel()
    vals = np.asarray(f(nodes))
    out = vals @ weights
    return out


# ---------------------------------------------------------------------------
# tanh-sinh (double exponential)
# ---------------------------------------------------------------------------

_DE_TMAX = 3.55
_DE_H0 = 0.5


@lru_cache(maxsize=32)
def _de_level(level: int) -> tuple[np.ndarray, np.ndarray]:
    """New abscissas (as sigma in (-1,1)) and weights introduced at ``level``.

    Level 0 is the coarse h=0.5 grid; level L >= 1 adds the odd multiples of
    h = 0.5 / 2**L.  Weights include the factor h of that level's final grid.
    """
    h = _DE_H0 / (2 ** level)
    if level == 0:
        k = np.arange(-int(_DE_TMAX / h), int(_DE_TMAX / h) + 1)
        t = k * h
    else:
        n = int(_DE_TMAX / h)
        k = np.arange(-n, n + 1)
        t = k * h
        t = t[k % 2 != 0]
    u = 0.5 * math.pi * np.sinh(t)
    sigma = np.tanh(u)
    w = h * (0.5 * math.pi) * np.cosh(t) / np.cosh(u) ** 2
    keep = w > 1e-300
    sigma, w = sigma[keep], w[keep]
    sigma.setflags(write=False)
    w.setflags(write=False)
    return sigma, w


def de_quad_rows(f: Callable[[np.ndarray], np.ndarray],
                 a: np.ndarray, b: np.ndarray, *,
                 rel_tol: float = 1e-13, abs_tol: float = 0.0,
                 max_level: int = 8, min_level: int = 2
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Batch tanh-sinh integration, one interval [a_i, b_i] per row.

    ``f`` maps a node matrix of shape (N, M) to integrand values of the same
    shape.  Rows converge collectively: levels are added until every row's
    last correction is within tolerance.  Returns (values, error_estimates).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)

    total = np.zeros(a.shape)
    prev = None
    err = np.full(a.shape, np.inf)
    for level in range(max_level + 1):
        sigma, w = _de_level(level)
        x = mid[..., None] + half[..., None] * sigma
        contrib = (np.asarray(f(x)) * w).sum(axis=-1) * half
        if level == 0:
            total = contrib
        else:
            total = 0.5 * total + contrib
        if prev is not None:
            err = np.abs(total - prev)
            scale = np.maximum(np.abs(total), 1e-300)
            if level >= min_level and np.all(
                    err <= np.maximum(abs_tol, rel_tol * scale)):
                break
        prev = total
    return total, err


def de_quad(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
            **kw) -> tuple[float, float]:
    """Scalar-interval tanh-sinh; ``f`` stays vectorized over nodes."""
    val, err = de_quad_rows(lambda x: f(x[0])[None, :],
                            np.array([a]), np.array([b]), **kw)
    return float(val[0]), float(err[0])


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod (7-15 pair)
# ---------------------------------------------------------------------------

# QUADPACK dqk15 abscissas (positive half) and weights
_XK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

# full 15-point tables, ordered left to right
_GK_NODES = np.concatenate([-_XK[:7], [0.0], _XK[6::-1]])
_GK_WK = np.concatenate([_WK[:7], [_WK[7]], _WK[6::-1]])
_gk_wg = np.zeros(15)
_gk_wg[1:14:2] = np.concatenate([_WG[:3], [_WG[3]], _WG[2::-1]])
_GK_WG = _gk_wg
del _gk_wg


def _gk_panel(f, a: float, b: float) -> tuple[np.ndarray, float]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(f(mid + half * _GK_NODES), dtype=float)
    k = half * (vals @ _GK_WK)
    g = half * (vals @ _GK_WG)
    err = float(np.max(np.abs(np.atleast_1d(k - g))))
    return np.atleast_1d(k), err


def adaptive_gauss_kronrod(f: Callable[[np.ndarray], np.ndarray],
                           a: float, b: float, *,
                           abs_tol: float = 1e-10, rel_tol: float = 1e-10,
                           max_panels: int = 512
                           ) -> tuple[np.ndarray, float]:
    """Globally adaptive G7/K15 with worst-interval-first bisection.

    ``f`` maps a node vector (M,) to values (M,) or (K, M); the error is
    controlled in the max norm across components.  Deterministic for a
    deterministic integrand.  Raises :class:`ConvergenceFailure` when the
    panel budget runs out, carrying the best estimate.
    """
    val, err = _gk_panel(f, a, b)
    panels = [(a, b, val, err)]
    while True:
        total = sum(p[2] for p in panels)
        total_err = sum(p[3] for p in panels)
        bound = max(abs_tol, rel_tol * float(np.max(np.abs(total))))
        if total_err <= bound:
            return np.atleast_1d(total), total_err
        if len(panels) >= max_panels:
            raise ConvergenceFailure(
                f"adaptive quadrature did not reach tol={bound:.3g} with "
                f"{max_panels} panels (err={total_err:.3g})",
                estimate=float(np.max(np.abs(total))), error=total_err)
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        pa, pb, _, _ = panels.pop(worst)
        pm = 0.5 * (pa + pb)
        panels.append((pa, pm, *_gk_panel(f, pa, pm)))
        panels.append((pm, pb, *_gk_panel(f, pm, pb)))

"""Muckenhoupt A2 weights on finite grids.

Weights are sampled profiles on a :class:`~rkl.schrodinger.Grid` together
with a numerically estimated A2 characteristic

    [w]_{A2} = sup_I (avg_I w) (avg_I 1/w),

estimated by sweeping a dyadic ladder of interval lengths over every start
position, with trapezoid averages from prefix sums.  The swept maximum is a
lower bound for the true characteristic and never decreases as the ladder
is refined.

Power weights |u - u0|^a with a in (-1, 1) carry an integrable singularity;
the sample at the singular node is replaced by the value that makes the
trapezoid rule exact on each of the two adjacent cells.  That choice is
reciprocal-consistent: the matched value for exponent -a is exactly the
reciprocal of the matched value for exponent a, so the same fix serves both
w and 1/w.

Translation by a lattice multiple is exact: on a dyadic grid the translated
weight re-samples to bit-identical interior values, so its characteristic
reproduces the original's whenever the features (power center, step edge,
clamp corners) stay inside the window.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .schrodinger import Grid

__all__ = [
    "WeightFamily",
    "Weight",
    "IntervalSweep",
    "A2Report",
    "CoverageWarning",
    "constant_weight",
    "power_weight",
    "clamped_exponential_weight",
    "step_weight",
    "a2_characteristic",
    "a2_scan",
    "translate_weight",
    "registered_family",
    "weight_id",
    "parse_weight_id",
    "DEFAULT_GRID",
]

#: Default construction grid: dyadic spacing 1/64 on [-8, 4], wide enough
#: that every registered feature point (centers -2, 0, 3; clamp corners at
#: +-2 and +-1.5; the step edge at 0) lands on an interior node.
DEFAULT_GRID = Grid(-8.0, 4.0, 769)


class CoverageWarning(UserWarning):
    """A translation moved a weight's features off the sampled window."""


class WeightFamily(enum.Enum):
    CONSTANT = "constant"
    POWER = "power"
    CLAMPED_EXPONENTIAL = "clamped_exponential"
    PIECEWISE_STEP = "piecewise_step"


@dataclass(frozen=True, eq=False)
class Weight:
    """A strictly positive sampled weight with its estimated characteristic.

    ``params`` is a flat tuple of (name, value) pairs; every family carries
    a ``shift`` entry so that the profile is evaluated at u + shift, which
    is what lattice translation adjusts.
    """

    family: WeightFamily
    params: tuple[tuple[str, float], ...]
    grid: Grid
    samples: np.ndarray
    a2_estimate: float

    def __post_init__(self):
        if self.samples.shape != (self.grid.count,):
            raise DomainError(
                f"samples shape {self.samples.shape} does not match grid "
                f"count {self.grid.count}")
        if not np.all(np.isfinite(self.samples)) or np.any(self.samples <= 0):
            raise DomainError("weight samples must be strictly positive "
                              "and finite")
        if not self.a2_estimate >= 1.0:
            raise DomainError(
                f"a2_estimate {self.a2_estimate} < 1 violates Cauchy-Schwarz")
        self.samples.setflags(write=False)

    def param(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class IntervalSweep:
    """Ladder of interval lengths for the characteristic sweep.

    Lengths run geometrically from ``min_cells`` grid cells up to the full
    window (ratio 2^(1/lengths_per_octave)); the full window is always
    included.  Doubling ``lengths_per_octave`` produces a superset of
    lengths, so the swept maximum is monotone under that refinement.
    """

    min_cells: int = 4
    lengths_per_octave: int = 1
    max_cells: int | None = None

    def __post_init__(self):
        if self.min_cells < 1:
            raise DomainError("min_cells must be >= 1")
        if self.lengths_per_octave < 1:
            raise DomainError("lengths_per_octave must be >= 1")

    def lengths(self, count: int) -> list[int]:
        top = count - 1
        if self.max_cells is not None:
            top = min(top, self.max_cells)
        if self.min_cells > top:
            raise DomainError(f"grid too short for min_cells="
                              f"{self.min_cells} (only {top} cells)")
        out: list[int] = []
        k = 0
        while True:
            cells = round(self.min_cells * 2.0 ** (k / self.lengths_per_octave))
            if cells >= top:
                break
            if not out or cells > out[-1]:
                out.append(cells)
            k += 1
        out.append(top)
        return out


@dataclass(frozen=True)
class A2Report:
    """Result of one characteristic sweep: the maximum and its maximizer."""

    value: float
    interval: tuple[float, float]
    start_index: int
    length_cells: int
    lengths_swept: int


# ---------------------------------------------------------------------------
# profiles and constructors
# ---------------------------------------------------------------------------

def _profile(family: WeightFamily, p: dict[str, float],
             grid: Grid) -> np.ndarray:
    u = grid.points + p["shift"]
    if family is WeightFamily.CONSTANT:
        return np.full(grid.count, p["value"])
    if family is WeightFamily.POWER:
        a, center = p["a"], p["center"]
        r = np.abs(u - center)
        vals = np.empty_like(r)
        sing = r < grid.h * 1e-9
        vals[~sing] = r[~sing] ** a
        # Trapezoid-matched cell value at the singular node: with this
        # sample, int |x|^a over each adjacent cell equals its trapezoid
        # estimate exactly, and the value for exponent -a is its exact
        # reciprocal, so the same fix is consistent for w and 1/w.
        vals[sing] = grid.h ** a * (1.0 - a) / (1.0 + a)
        return vals
    if family is WeightFamily.CLAMPED_EXPONENTIAL:
        return np.exp(np.clip(p["rate"] * u, -p["clamp"], p["clamp"]))
    if family is WeightFamily.PIECEWISE_STEP:
        return np.where(u < p["edge"], p["lo"], p["hi"])
    raise DomainError(f"unknown weight family {family!r}")


def _features(family: WeightFamily, p: dict[str, float]) -> tuple[float, ...]:
    """Profile feature points, in the shifted coordinate of the samples."""
    s = p["shift"]
    if family is WeightFamily.POWER:
        return (p["center"] - s,)
    if family is WeightFamily.CLAMPED_EXPONENTIAL:
        corner = p["clamp"] / abs(p["rate"])
        return (-corner - s, corner - s)
    if family is WeightFamily.PIECEWISE_STEP:
        return (p["edge"] - s,)
    return ()


def _build(family: WeightFamily, params: tuple[tuple[str, float], ...],
           grid: Grid) -> Weight:
    p = dict(params)
    samples = _profile(family, p, grid)
    report = _scan_samples(samples, grid, IntervalSweep())
    # The per-interval product is >= 1 by Cauchy-Schwarz; the max can only
    # dip below through trapezoid round-off, so floor it.
    return Weight(family, params, grid, samples,
                  a2_estimate=max(report.value, 1.0))


def constant_weight(grid: Grid | None = None, value: float = 1.0) -> Weight:
    if not value > 0:
        raise DomainError("constant weight value must be positive")
    return _build(WeightFamily.CONSTANT,
                  (("value", float(value)), ("shift", 0.0)),
                  grid or DEFAULT_GRID)


def power_weight(a: float, center: float = 0.0,
                 grid: Grid | None = None) -> Weight:
    """|u - center|^a with a in (-1, 1), singular node trapezoid-matched."""
    if not -1.0 < a < 1.0:
        raise DomainError(f"power exponent must lie in (-1, 1), got {a}")
    return _build(WeightFamily.POWER,
                  (("a", float(a)), ("center", float(center)),
                   ("shift", 0.0)),
                  grid or DEFAULT_GRID)


def clamped_exponential_weight(rate: float, clamp: float,
                               grid: Grid | None = None) -> Weight:
    """exp(rate * u) clamped to the range [e^-clamp, e^+clamp].

    The unclamped exponential has infinite characteristic; the clamp keeps
    it finite and growing with the clamp bound, which makes the family a
    stress control for the sweep.
    """
    if rate == 0:
        raise DomainError("rate must be nonzero (use constant_weight)")
    if not clamp > 0:
        raise DomainError("clamp bound must be positive")
    return _build(WeightFamily.CLAMPED_EXPONENTIAL,
                  (("rate", float(rate)), ("clamp", float(clamp)),
                   ("shift", 0.0)),
                  grid or DEFAULT_GRID)


def step_weight(lo: float, hi: float, edge: float = 0.0,
                grid: Grid | None = None) -> Weight:
    """Two-level step: lo for u < edge, hi for u >= edge."""
    if not (lo > 0 and hi > 0):
        raise DomainError("step levels must be positive")
    return _build(WeightFamily.PIECEWISE_STEP,
                  (("edge", float(edge)), ("lo", float(lo)),
                   ("hi", float(hi)), ("shift", 0.0)),
                  grid or DEFAULT_GRID)


# ---------------------------------------------------------------------------
# characteristic sweep
# ---------------------------------------------------------------------------

def _cumtrap(samples: np.ndarray, h: float) -> np.ndarray:
    """T[k] = trapezoid integral from node 0 to node k (T[0] = 0)."""
    out = np.empty(samples.size)
    out[0] = 0.0
    np.cumsum((samples[1:] + samples[:-1]) * (0.5 * h), out=out[1:])
    return out


def _scan_samples(samples: np.ndarray, grid: Grid,
                  sweep: IntervalSweep) -> A2Report:
    tw = _cumtrap(samples, grid.h)
    ti = _cumtrap(1.0 / samples, grid.h)
    lengths = sweep.lengths(grid.count)
    best_val, best_start, best_cells = -math.inf, 0, lengths[0]
    for cells in lengths:
        width = cells * grid.h
        prod = (tw[cells:] - tw[:-cells]) * (ti[cells:] - ti[:-cells])
        prod /= width * width
        i = int(np.argmax(prod))
        if prod[i] > best_val:
            best_val, best_start, best_cells = float(prod[i]), i, cells
    pts = grid.points
    return A2Report(value=best_val,
                    interval=(float(pts[best_start]),
                              float(pts[best_start + best_cells])),
                    start_index=best_start,
                    length_cells=best_cells,
                    lengths_swept=len(lengths))


def a2_scan(w: Weight, interval_sweep: IntervalSweep | None = None) -> A2Report:
    """Characteristic sweep with the maximizing interval reported.

    For power weights whose center lies inside the window, the maximizer
    must touch the center (the singularity is where averaging pays); a
    maximizer that lands elsewhere flags a ladder bug.
    """
    report = _scan_samples(w.samples, w.grid,
                           interval_sweep or IntervalSweep())
    if w.family is WeightFamily.POWER:
        c = w.param("center") - w.param("shift")
        if w.grid.u_min <= c <= w.grid.u_max:
            lo, hi = report.interval
            slack = w.grid.h * (1.0 + 1e-9)
            assert lo - slack <= c <= hi + slack, (
                f"power-weight maximizer {report.interval} does not touch "
                f"the center {c}; the interval ladder is buggy")
    return report


def a2_characteristic(w: Weight,
                      interval_sweep: IntervalSweep | None = None) -> float:
    """Swept lower bound for [w]_{A2}; see :func:`a2_scan` for the where."""
    return a2_scan(w, interval_sweep).value


# ---------------------------------------------------------------------------
# translation and the registered sweep set
# ---------------------------------------------------------------------------

def translate_weight(w: Weight, s: float) -> Weight:
    """The weight u -> w(u + s), re-sampled and re-estimated on w's grid.

    ``s`` must be a lattice multiple of the grid spacing, which keeps the
    surviving interior samples bit-identical to the originals.  Warns with
    :class:`CoverageWarning` when the translation pushes a feature point
    (power center, clamp corner, step edge) off the sampled window, since
    the re-estimated characteristic then reflects a different profile.
    """
    steps = s / w.grid.h
    if abs(steps - round(steps)) > 1e-9:
        raise DomainError(
            f"translation {s} is not a multiple of the grid spacing "
            f"{w.grid.h} (offset {steps - round(steps)} cells)")
    p_old = dict(w.params)
    params = tuple((k, v + s) if k == "shift" else (k, v)
                   for k, v in w.params)
    p_new = dict(params)
    lo, hi = w.grid.u_min, w.grid.u_max
    for old, new in zip(_features(w.family, p_old),
                        _features(w.family, p_new)):
        if lo <= old <= hi and not lo <= new <= hi:
            warnings.warn(
                f"translation by {s} moved a feature of {weight_id(w)} "
                f"from u={old:g} off the window [{lo:g}, {hi:g}]",
                CoverageWarning, stacklevel=2)
    return _build(w.family, params, w.grid)


def registered_family(grid: Grid | None = None) -> list[Weight]:
    """The canonical sweep set, in deterministic order.

    One constant; the twelve power weights |u - u0|^a for
    a in {-0.7, -0.3, 0.3, 0.7} by u0 in {-2, 0, 3}; two clamped
    exponentials; one two-level step.  Sixteen in all.
    """
    grid = grid or DEFAULT_GRID
    out = [constant_weight(grid)]
    for a in (-0.7, -0.3, 0.3, 0.7):
        for center in (-2.0, 0.0, 3.0):
            out.append(power_weight(a, center, grid))
    out.append(clamped_exponential_weight(1.0, 2.0, grid))
    out.append(clamped_exponential_weight(2.0, 3.0, grid))
    out.append(step_weight(1.0, 5.0, 0.0, grid))
    return out


_ID_KEYS = {
    WeightFamily.CONSTANT: ("value",),
    WeightFamily.POWER: ("a", "center"),
    WeightFamily.CLAMPED_EXPONENTIAL: ("rate", "clamp"),
    WeightFamily.PIECEWISE_STEP: ("edge", "lo", "hi"),
}


def weight_id(w: Weight) -> str:
    """Canonical string identifier, e.g. ``power:a=0.3:center=0``.

    Default-valued entries are elided (``constant`` rather than
    ``constant:value=1``); a nonzero shift is appended last.
    """
    parts = [w.family.value]
    for key in _ID_KEYS[w.family]:
        value = w.param(key)
        if w.family is WeightFamily.CONSTANT and value == 1.0:
            continue
        parts.append(f"{key}={value:g}")
    if w.param("shift") != 0.0:
        parts.append(f"shift={w.param('shift'):g}")
    return ":".join(parts)


def parse_weight_id(text: str, grid: Grid | None = None) -> Weight:
    """Inverse of :func:`weight_id`; unknown families or keys error."""
    head, *rest = text.strip().split(":")
    try:
        family = WeightFamily(head)
    except ValueError:
        raise DomainError(f"unknown weight family {head!r} in {text!r}") \
            from None
    kv: dict[str, float] = {}
    for item in rest:
        key, sep, val = item.partition("=")
        if not sep:
            raise DomainError(f"malformed weight parameter {item!r} in "
                              f"{text!r}")
        try:
            kv[key] = float(val)
        except ValueError:
            raise DomainError(f"non-numeric value in {item!r}") from None
    shift = kv.pop("shift", 0.0)
    allowed = set(_ID_KEYS[family])
    if not set(kv) <= allowed:
        raise DomainError(f"keys {sorted(set(kv) - allowed)} not valid for "
                          f"{family.value}")
    if family is WeightFamily.CONSTANT:
        w = constant_weight(grid, value=kv.get("value", 1.0))
    elif family is WeightFamily.POWER:
        if "a" not in kv:
            raise DomainError("power weight id needs a=<exponent>")
        w = power_weight(kv["a"], kv.get("center", 0.0), grid)
    elif family is WeightFamily.CLAMPED_EXPONENTIAL:
        if not {"rate", "clamp"} <= set(kv):
            raise DomainError("clamped_exponential id needs rate= and clamp=")
        w = clamped_exponential_weight(kv["rate"], kv["clamp"], grid)
    else:
        if not {"lo", "hi"} <= set(kv):
            raise DomainError("piecewise_step id needs lo= and hi=")
        w = step_weight(kv["lo"], kv["hi"], kv.get("edge", 0.0), grid)
    if shift != 0.0:
        w = translate_weight(w, shift)
    return w

"""Sweep engine and estimate registry: gates, detectors, determinism,
negative controls, and frozen regression values."""

import math

import numpy as np
import pytest

from rkl.errors import DomainError
from rkl.kernels import PairSet, s01_gradient
from rkl.schrodinger import Grid
from rkl.verify import (DRIFT_TOL, FAILURE_BUDGET, RATIO_CAP, SUITES, Domain,
                        EstimateSpec, OperatorReport, RatioReport, _gate_report,
                        _edge_divergent, _s01_grad_cached, aggregate,
                        mihlin_sweep, registry, run_all, run_spec, suite_ids)
from rkl.weights import constant_weight

PAIRS = Domain(kind="pairs")


def _byid(sid: str) -> EstimateSpec:
    for s in registry():
        if s.id == sid:
            return s
    raise KeyError(sid)


# ---------------------------------------------------------------------------
# registry structure
# ---------------------------------------------------------------------------

def test_registry_size_and_uniqueness():
    specs = registry()
    assert len(specs) >= 22
    ids = [s.id for s in specs]
    stmts = [s.statement for s in specs]
    assert len(set(ids)) == len(ids)
    assert len(set(stmts)) == len(stmts)


def test_registry_has_negative_controls():
    negs = [s for s in registry() if s.expected == "fail"]
    assert len(negs) >= 2


def test_registry_required_ids_present():
    ids = {s.id for s in registry()}
    assert "lm3-case4-n1-j0" in ids
    assert "stanker-grad-K1" in ids


def test_suites_partition():
    assert set(SUITES) == {"bessel", "kernels", "estimates", "operators",
                           "all"}
    every = set(suite_ids("all"))
    bessel = set(suite_ids("bessel"))
    kernels = set(suite_ids("kernels"))
    assert suite_ids("operators") == []
    assert suite_ids("estimates") == suite_ids("all")
    assert bessel and kernels
    assert bessel | kernels == every
    assert bessel & kernels == set()
    with pytest.raises(DomainError):
        suite_ids("everything")


def test_spec_expected_validation():
    with pytest.raises(DomainError):
        EstimateSpec("x", "y", lambda t, c: c["u"], lambda t, c: c["u"],
                     PAIRS, expected="maybe")


# ---------------------------------------------------------------------------
# engine behaviour on synthetic estimates
# ---------------------------------------------------------------------------

def _zeros(t, c):
    return np.zeros_like(c["u"])


def test_interior_maximum_passes():
    spec = EstimateSpec("syn-pass", "interior max",
                        lambda t, c: -(c["u"] ** 2 + c["v"] ** 2) / 50.0,
                        _zeros, PAIRS)
    r = run_spec(spec)
    assert r.verdict == "pass"
    assert r.sup_ratio == 1.0
    assert r.fitted_constant == 1.0
    assert r.drift == 0.0
    assert r.trend_axis is None
    assert r.as_expected


def test_edge_growth_is_detected():
    # log-ratio -u rises linearly into the truncated u = -10 edge: bounded
    # on the lattice but divergent in the limit; the slab detector must veto
    spec = EstimateSpec("syn-trend", "edge growth",
                        lambda t, c: -c["u"], _zeros, PAIRS)
    r = run_spec(spec)
    assert r.verdict == "fail"
    assert r.trend_axis == "u"
    assert r.sup_ratio == pytest.approx(math.exp(10.0), rel=1e-12)
    assert math.isnan(r.fitted_constant)


def test_trend_axes_opt_out():
    spec = EstimateSpec("syn-noscan", "edge growth, scan disabled",
                        lambda t, c: -c["u"], _zeros, PAIRS, trend_axes=())
    r = run_spec(spec)
    assert r.verdict == "pass"
    assert r.trend_axis is None


def test_failure_budget_enforced():
    spec = EstimateSpec("syn-nan", "partial nan",
                        lambda t, c: np.where(c["u"] > 0, np.nan, 0.0),
                        _zeros, PAIRS)
    r = run_spec(spec)
    assert r.verdict == "fail"
    assert r.failure_fraction > FAILURE_BUDGET


def test_ratio_cap_enforced():
    spec = EstimateSpec("syn-cap", "constant ratio above cap",
                        lambda t, c: np.full_like(c["u"], 30.0), _zeros,
                        PAIRS)
    r = run_spec(spec)
    assert math.exp(30.0) > RATIO_CAP
    assert r.verdict == "fail"


def test_run_spec_deterministic():
    spec = _byid("eq4-j-decay")
    assert run_spec(spec) == run_spec(spec)


def test_run_all_parallelism_invariant():
    subset = [_byid(i) for i in ("eq1-j-bounded", "eq3-exp-shift",
                                 "eq4-j-decay", "eq7-j-small",
                                 "lm5-i-upper", "lm5-k-lower")]
    assert run_all(1, specs=subset) == run_all(4, specs=subset)


# ---------------------------------------------------------------------------
# slab growth detector
# ---------------------------------------------------------------------------

def test_edge_divergent_fires_on_steady_rise():
    m = np.array([10.0, 8.0, 6.0, 4.0, 2.0, 0.0, -2.0, -4.0])
    assert _edge_divergent(m, sup=10.0)


def test_edge_divergent_ignores_plateau():
    # monotone but decelerating into the edge: a lossy-but-bounded profile
    m = np.array([5.0, 4.99, 4.9, 4.0, 3.0, 2.0, 1.0, 0.0])
    assert not _edge_divergent(m, sup=5.0)


def test_edge_divergent_requires_sup_in_edge_slab():
    m = np.array([3.0, 8.0, 6.0, 4.0, 2.0, 0.0, -2.0, -4.0])
    assert not _edge_divergent(m, sup=8.0)


def test_edge_divergent_requires_significant_rise():
    m = np.array([1.0, 0.5, 0.0, -0.5, -1.0, -1.5, -2.0, -2.5])
    assert not _edge_divergent(m, sup=1.0)  # total rise 1.0 < log 4


def test_edge_divergent_needs_finite_slabs():
    m = np.array([np.inf, 8.0, 6.0, 4.0, 2.0, 0.0, -2.0, -4.0])
    assert not _edge_divergent(m, sup=np.inf)
    m = np.array([10.0, -np.inf, 6.0, 4.0, 2.0, 0.0, -2.0, -4.0])
    assert not _edge_divergent(m, sup=10.0)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

def test_gap_domain_starts_exactly_at_unit_gap():
    cols = Domain(kind="gap").columns(0)
    gaps = np.exp(cols["v"]) - np.exp(cols["u"])
    assert gaps.min() == pytest.approx(1.0, rel=1e-12)
    assert np.all(cols["v"] <= 6.0 + 1e-12)


def test_pairs_domain_has_fine_diagonal_band():
    cols = Domain(kind="pairs").columns(0)
    d = np.abs(cols["u"] - cols["v"])
    # fine band spacing 0.05 shows up only near the diagonal
    assert np.any((d > 0) & (d < 0.1))
    assert cols["u"].size == cols["v"].size


def test_axis_geometry_open_vs_closed():
    d_open = Domain(kind="pairs")
    lo, hi, log_scale, lo_open, hi_open = d_open.axis_geometry("u")
    assert (lo, hi) == (-10.0, 6.0) and not log_scale
    assert lo_open and hi_open
    d_closed = Domain(kind="pairs", closed_lo=("u",))
    assert d_closed.axis_geometry("u")[3] is False


def test_unknown_domain_kind():
    with pytest.raises(DomainError):
        Domain(kind="mesh").columns(0)


# ---------------------------------------------------------------------------
# frozen regressions and negative controls
# ---------------------------------------------------------------------------

FROZEN_SUPS = {
    "eq1-j-bounded": 0.9999997500000165,
    "eq4-j-decay": 0.7787217609321642,
    "eq7-j-small": 0.999999944444445,
    "eq3-exp-shift": 1.3429773469668855,
    "lm5-i-upper": 1.2546093525049165,
    "lm5-k-upper": 39.555595763311274,
    "eq19-chi-term": 7.444732147579757,
}


@pytest.mark.parametrize("sid", sorted(FROZEN_SUPS))
def test_frozen_sup_regressions(sid):
    r = run_spec(_byid(sid))
    assert r.verdict == "pass"
    assert r.sup_ratio == pytest.approx(FROZEN_SUPS[sid], rel=1e-9)


def test_negative_control_flipped_envelope():
    r = run_spec(_byid("neg-lm5-k-flipped"))
    assert r.verdict == "fail"
    assert r.as_expected  # failing is exactly what the control is for


def test_negative_control_weak_decay():
    r = run_spec(_byid("neg-eq5-weak-decay"))
    assert r.verdict == "fail"
    assert r.as_expected
    assert r.sup_ratio > RATIO_CAP


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def test_gate_report_boundary():
    assert _gate_report("x", "m", 1.0, 1.0).verdict == "pass"
    assert _gate_report("x", "m", 1.0 + 1e-12, 1.0).verdict == "fail"


def test_operator_report_as_expected():
    ok = OperatorReport("a", "m", 0.1, 0.5, "pass")
    bad = OperatorReport("b", "m", 0.9, 0.5, "fail")
    assert ok.as_expected and not bad.as_expected


def test_aggregate_mixed_reports():
    ok = OperatorReport("a", "m", 0.1, 0.5, "pass")
    bad = OperatorReport("b", "m", 0.9, 0.5, "fail")
    ratio_ok = RatioReport("c", 1.0, {}, 10, 1.0, "pass")
    surprise = RatioReport("d", 1.0, {}, 10, 1.0, "pass", expected="fail")
    all_ok, mismatched = aggregate([ok, ratio_ok])
    assert all_ok and mismatched == []
    all_ok, mismatched = aggregate([ok, bad, ratio_ok, surprise])
    assert not all_ok and mismatched == ["b", "d"]


def test_constants_are_sane():
    assert RATIO_CAP == 1e12
    assert 0.0 < DRIFT_TOL < 1.0
    assert 0.0 < FAILURE_BUDGET < 0.01


# ---------------------------------------------------------------------------
# dual routes shared with the kernel module
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("u, v", [(-1.5, -0.9), (0.3, 1.2)])
def test_sweep_gradient_evaluator_matches_adaptive_route(u, v):
    cols = {"ps": PairSet(np.array([u]), np.array([v]))}
    (du_s, du_l), (dv_s, dv_l) = _s01_grad_cached(cols)
    du_fixed = float(du_s[0]) * math.exp(float(du_l[0]))
    dv_fixed = float(dv_s[0]) * math.exp(float(dv_l[0]))
    du, dv = s01_gradient(u, v, tol=1e-10)
    assert du_fixed == pytest.approx(du, rel=1e-9)
    assert dv_fixed == pytest.approx(dv, rel=1e-9)


# ---------------------------------------------------------------------------
# xi-sweep plumbing (small window; the wide acceptance window is separate)
# ---------------------------------------------------------------------------

def test_mihlin_sweep_structure_small_window():
    base = Grid(-8.0, 4.0, 193)
    cells, reports, envelope = mihlin_sweep(
        j_values_=(0,), n_values=(0,), base=base,
        weights=[constant_weight(base)])
    assert len(cells) == 1
    cell = cells[0]
    assert cell.family == "m0" and cell.n == 0
    assert cell.weight == "constant"
    assert len(cell.norms) == 17 and len(cell.norms_fixed) == 17
    assert cell.variation == pytest.approx(
        max(cell.norms) / min(cell.norms) - 1.0, rel=1e-12)
    by_id = {r.id: r for r in reports}
    # translation identity must hold bitwise even on this narrow window
    assert by_id["op-mihlin-bitwise"].verdict == "pass"
    assert by_id["op-mihlin-m0-n0"].value == pytest.approx(cell.variation)
    env = envelope[("m0", 0)]
    assert all(a <= b for (_, a), (_, b) in zip(env, env[1:])) or len(env) == 1


def test_mihlin_sweep_ladder_validation():
    with pytest.raises(DomainError):
        mihlin_sweep(xi_count=16)
    # grid spacing that the half-integer ladder cannot sit on
    with pytest.raises(DomainError):
        mihlin_sweep(base=Grid(-8.0, 4.0, 100))

"""Acceptance gate: the eight end-to-end criteria the package promises.

Each test prints one ``acceptance <name>: PASS/FAIL`` line with the
measured figure, then asserts the stated tolerance and runtime budget.
Two companion tests pin down configurations that second-order finite
differences cannot support at the stated tolerances; they assert those
configurations faithfully and are expected to fail (strict xfail), with
the feasible deep-window route demonstrated alongside.
"""

import math
import time

import numpy as np
import pytest

from rkl.bessel import log_i, log_k, wronskian_defect
from rkl.kernels import integrated_signed_log
from rkl.schrodinger import Grid, m_op_fd
from rkl.verify import (aggregate, check_heat_gnewuch,
                        check_resolvent_vs_bessel, check_split_identity,
                        check_subordination, mihlin_sweep, registry, run_all)

X_GRID = np.geomspace(1e-3, 30.0, 200)


def _line(name: str, ok: bool, detail: str) -> None:
    print(f"acceptance {name}: {'PASS' if ok else 'FAIL'} ({detail})",
          flush=True)


# ---------------------------------------------------------------------------
# 1. Bessel accuracy
# ---------------------------------------------------------------------------

def test_criterion_1_bessel_accuracy():
    # closed-form references in 40-digit arithmetic: the float64 forms
    # of I_{3/2} cancel near x=0 and would drown the measurement
    from mpmath import mp
    mp.dps = 40
    start = time.perf_counter()
    x = X_GRID

    def closed_log(kind: str, nu: float, xv: float):
        X = mp.mpf(xv)
        if kind == "i":
            body = mp.sinh(X) if nu == 0.5 else mp.cosh(X) - mp.sinh(X) / X
            return mp.log(mp.sqrt(2 / (mp.pi * X)) * body)
        body = mp.mpf(1) if nu == 0.5 else 1 + 1 / X
        return mp.log(mp.sqrt(mp.pi / (2 * X)) * mp.e ** (-X) * body)

    worst_closed = 0.0
    for kind, nu in (("i", 0.5), ("i", 1.5), ("k", 0.5), ("k", 1.5)):
        got = (log_i if kind == "i" else log_k)(nu, x)[0]
        rel = max(abs(mp.expm1(mp.mpf(float(g)) - closed_log(kind, nu, xv)))
                  for g, xv in zip(got, x))
        worst_closed = max(worst_closed, float(rel))

    worst_wronskian = max(abs(wronskian_defect(nu, xv))
                          for nu in (0.0, 0.25, 0.49, 1.3, 3.5)
                          for xv in x)
    elapsed = time.perf_counter() - start
    ok = worst_closed <= 1e-10 and worst_wronskian <= 1e-9 and elapsed <= 5.0
    _line("bessel-accuracy", ok,
          f"closed-form rel {worst_closed:.3e} <= 1e-10, "
          f"wronskian {worst_wronskian:.3e} <= 1e-9, {elapsed:.1f}s <= 5s")
    assert worst_closed <= 1e-10
    assert worst_wronskian <= 1e-9
    assert elapsed <= 5.0


# ---------------------------------------------------------------------------
# 2. Resolvent oracle equivalence
# ---------------------------------------------------------------------------

@pytest.mark.xfail(
    strict=True,
    reason="shallow window cannot meet 1e-3: the second-order stencil's "
           "decay-rate error is (h^2/72)e^{3v} ~ 0.226 at v=4, and the "
           "Dirichlet wall at -12 reflects ~0.124 into (-4,-4) at t=0.1; "
           "the deep-window demonstration below is the feasible form")
def test_criterion_2_resolvent_bessel_shallow_window():
    r = check_resolvent_vs_bessel(t_values=(0.1, 0.3, 0.49),
                                  grid=Grid(-12.0, 6.0, 1801), window=4.0)
    _line("resolvent-bessel(shallow [-12,6], |u|,|v|<=4)",
          r.value <= 1e-3, f"max rel defect {r.value:.3e} vs 1e-3")
    assert r.value <= 1e-3


def test_criterion_2_resolvent_bessel_demo():
    start = time.perf_counter()
    r = check_resolvent_vs_bessel()
    elapsed = time.perf_counter() - start
    ok = r.verdict == "pass" and elapsed <= 120.0
    _line("resolvent-bessel", ok,
          f"max rel defect {r.value:.3e} <= {r.gate:.0e} on deep window "
          f"{r.details['grid']}, {elapsed:.1f}s <= 120s")
    assert r.verdict == "pass"
    assert r.value <= 1e-3
    assert elapsed <= 120.0


@pytest.mark.xfail(
    strict=True,
    reason="same two channels as the shallow resolvent window: left-wall "
           "truncation bias (4.2e-3 at (0,1) for u_min=-12) and the h^2 "
           "decay-rate error; the deep banded-column route passes at 2e-3 "
           "inside |u|,|v| <= 2 (op-kernel-columns)")
def test_multiplier_entries_shallow_window():
    grid = Grid(-12.0, 6.0, 1801)
    op = m_op_fd("m1", 1.0, grid)
    idx = grid.window(-3.0, 3.0)[::10]
    pts = grid.points[idx]
    kern = op.entries[np.ix_(idx, idx)] / grid.h
    uu, vv = np.meshgrid(pts, pts, indexing="ij")
    mask = np.abs(uu - vv) >= 0.2
    sign, logm = integrated_signed_log("m1", 0, uu[mask], vv[mask])
    exact = sign * np.exp(logm)
    rel = float((np.abs(kern[mask] - exact) / np.abs(exact)).max())
    _line("multiplier-entries(shallow [-12,6], |u|,|v|<=3)",
          rel <= 2e-3, f"max rel defect {rel:.3e} vs 2e-3")
    assert rel <= 2e-3


# ---------------------------------------------------------------------------
# 3. Subordination identity
# ---------------------------------------------------------------------------

def test_criterion_3_subordination():
    start = time.perf_counter()
    r = check_subordination()
    elapsed = time.perf_counter() - start
    ok = (r.verdict == "pass" and r.value <= 1e-3
          and r.details["count"] <= 1500 and elapsed <= 120.0)
    _line("subordination", ok,
          f"spectral-norm defect {r.value:.3e} <= 1e-3, "
          f"count {r.details['count']} <= 1500, {elapsed:.1f}s <= 120s")
    assert r.verdict == "pass"
    assert r.value <= 1e-3
    assert r.details["count"] <= 1500
    assert elapsed <= 120.0


# ---------------------------------------------------------------------------
# 4. Exact split identity
# ---------------------------------------------------------------------------

def test_criterion_4_split_identity():
    start = time.perf_counter()
    r = check_split_identity()
    elapsed = time.perf_counter() - start
    ok = r.verdict == "pass" and r.value <= 1e-9 and elapsed <= 60.0
    _line("split-identity", ok,
          f"defect {r.value:.3e} <= 1e-9 (both families), "
          f"{elapsed:.1f}s <= 60s")
    assert r.verdict == "pass"
    assert r.value <= 1e-9
    assert elapsed <= 60.0


# ---------------------------------------------------------------------------
# 5. Heat-kernel route equivalence
# ---------------------------------------------------------------------------

def test_criterion_5_heat_routes():
    start = time.perf_counter()
    r = check_heat_gnewuch()
    elapsed = time.perf_counter() - start
    ok = r.verdict == "pass" and r.value <= 1e-3 and elapsed <= 180.0
    _line("heat-routes", ok,
          f"max abs kernel defect {r.value:.3e} <= 1e-3 over "
          f"(xi, t) in {{0.5,1,2}}x{{0.2,0.5,1}}, {elapsed:.1f}s <= 180s")
    assert r.verdict == "pass"
    assert r.value <= 1e-3
    assert elapsed <= 180.0


# ---------------------------------------------------------------------------
# 6. Estimate registry
# ---------------------------------------------------------------------------

def test_criterion_6_estimate_registry():
    start = time.perf_counter()
    specs = registry()
    reports = run_all(parallelism=4, specs=specs)
    elapsed = time.perf_counter() - start

    assert len(reports) == len(specs)
    negatives = {r.id for r in reports if r.expected == "fail"}
    assert negatives == {"neg-eq5-weak-decay", "neg-lm5-k-flipped"}
    bad = [r.id for r in reports if not r.as_expected]
    for r in reports:
        if r.expected == "pass":
            assert math.isfinite(r.sup_ratio), r.id
            assert math.isnan(r.drift) or r.drift <= 0.20, r.id
            assert r.verdict == "pass", r.id
        else:
            assert r.verdict == "fail", r.id
    all_ok, mismatched = aggregate(reports)
    ok = all_ok and not bad and elapsed <= 600.0
    _line("estimate-registry", ok,
          f"{len(reports)} specs, {len(negatives)} negative controls "
          f"failed as designed, mismatched={mismatched}, "
          f"{elapsed:.1f}s <= 600s")
    assert all_ok and mismatched == []
    assert elapsed <= 600.0


# ---------------------------------------------------------------------------
# 7. Scale-derivative norm sweep
# ---------------------------------------------------------------------------

def test_criterion_7_norm_sweep():
    start = time.perf_counter()
    cells, reports, envelope = mihlin_sweep()
    elapsed = time.perf_counter() - start

    pairs = {(c.family, c.n) for c in cells}
    assert pairs == {(f, n) for f in ("m0", "m1") for n in (0, 1, 2)}
    assert len(cells) == 6 * 16          # registered weight family
    assert all(len(c.norms) == 17 for c in cells)
    worst = max(c.variation for c in cells)

    by_id = {r.id: r for r in reports}
    gate_ids = [f"op-mihlin-{f}-n{n}" for f in ("m0", "m1")
                for n in (0, 1, 2)]
    for rid in gate_ids:
        assert by_id[rid].verdict == "pass", rid
        assert by_id[rid].value <= 0.10, rid
    assert by_id["op-mihlin-bitwise"].verdict == "pass"

    # fitted envelope: per (family, n) a monotone majorant over [w]_{A2}
    for key, env in envelope.items():
        a2s = [a for a, _ in env]
        vals = [v for _, v in env]
        assert a2s == sorted(a2s)
        assert vals == sorted(vals)
        peak = max(max(c.norms) for c in cells
                   if (c.family, c.n) == key)
        assert peak <= vals[-1] * (1 + 1e-12)

    ok = worst <= 0.10 and elapsed <= 1200.0
    _line("norm-sweep", ok,
          f"worst variation {worst:.3e} <= 0.10 across 6 operators x "
          f"16 weights x 17 xi, translation identity bitwise, "
          f"{elapsed:.1f}s <= 1200s")
    assert worst <= 0.10
    assert elapsed <= 1200.0


# ---------------------------------------------------------------------------
# 8. Standard-kernel constants for K1
# ---------------------------------------------------------------------------

def test_criterion_8_standard_kernel():
    start = time.perf_counter()
    wanted = {"stanker-size-K1", "stanker-grad-K1"}
    specs = [s for s in registry() if s.id in wanted]
    assert {s.id for s in specs} == wanted
    reports = {r.id: r for r in run_all(parallelism=2, specs=specs)}
    elapsed = time.perf_counter() - start

    size, grad = reports["stanker-size-K1"], reports["stanker-grad-K1"]
    ok = (size.verdict == "pass" and grad.verdict == "pass"
          and elapsed <= 120.0)
    _line("standard-kernel", ok,
          f"|K1|*|u-v| C={size.fitted_constant:.6g}, "
          f"grad C={grad.fitted_constant:.6g}, both refinement-stable, "
          f"{elapsed:.1f}s <= 120s")
    for r in (size, grad):
        assert r.verdict == "pass"
        assert math.isfinite(r.fitted_constant)
        assert math.isnan(r.drift) or r.drift <= 0.20
    assert size.fitted_constant == pytest.approx(0.931687, rel=1e-5)
    assert grad.fitted_constant == pytest.approx(7.77121, rel=1e-5)
    assert elapsed <= 120.0

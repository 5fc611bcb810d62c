"""A2 weights: characteristic sweep, closed-form anchors, translation
identities, and the canonical sweep family."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rkl.errors import DomainError
from rkl.schrodinger import Grid
from rkl.weights import (DEFAULT_GRID, A2Report, CoverageWarning,
                         IntervalSweep, Weight, a2_characteristic, a2_scan,
                         clamped_exponential_weight, constant_weight,
                         parse_weight_id, power_weight, registered_family,
                         step_weight, translate_weight, weight_id)


# ---------------------------------------------------------------------------
# closed-form anchors
# ---------------------------------------------------------------------------

def test_constant_weight_characteristic_is_one():
    assert constant_weight().a2_estimate == 1.0
    assert constant_weight(Grid(-1.0, 1.0, 129), value=7.5).a2_estimate == 1.0


def test_power_half_exceeds_symmetric_interval_bound():
    # on any interval [-r, r] the product of averages of |u|^(1/2) and
    # |u|^(-1/2) is exactly 4/3; the sweep must find at least that
    w = power_weight(0.5, 0.0, Grid(-2.0, 2.0, 1025))
    assert w.a2_estimate >= (4.0 / 3.0) * (1.0 - 1e-3)
    # frozen sweep value (asymmetric maximizer beats 4/3)
    assert w.a2_estimate == pytest.approx(1.506238009620088, rel=1e-12)


def test_step_weight_approaches_closed_form():
    # straddling interval, half on each level: (3)(3/5) = 9/5
    w = step_weight(1.0, 5.0, 0.0)
    assert w.a2_estimate <= 1.8 + 1e-12
    assert w.a2_estimate >= 1.8 * (1.0 - 1e-5)
    assert w.a2_estimate == pytest.approx(1.799996948242255, rel=1e-12)


def test_power_reciprocal_pair_share_characteristic():
    # the singular-node fix is reciprocal-consistent, so w and 1/w sweep
    # to the same characteristic, exactly
    for a in (0.3, 0.7):
        wp = power_weight(a, 0.0)
        wm = power_weight(-a, 0.0)
        assert wp.a2_estimate == wm.a2_estimate


def test_power_maximizer_touches_center():
    r = a2_scan(power_weight(0.5, 0.0, Grid(-2.0, 2.0, 1025)))
    lo, hi = r.interval
    assert lo <= 0.0 <= hi
    assert r.value == pytest.approx(1.506238009620088, rel=1e-12)
    assert r.length_cells >= 1 and r.lengths_swept >= 5


@given(st.floats(min_value=-10.0, max_value=10.0))
def test_characteristic_is_scale_invariant(log_c):
    w = power_weight(0.3, 0.0, Grid(-2.0, 2.0, 129))
    scaled = Weight(w.family, w.params, w.grid,
                    math.exp(log_c) * w.samples, w.a2_estimate)
    assert a2_characteristic(scaled) == pytest.approx(w.a2_estimate,
                                                      rel=1e-12)


# ---------------------------------------------------------------------------
# interval ladder
# ---------------------------------------------------------------------------

def test_ladder_lengths_structure():
    sweep = IntervalSweep()
    lengths = sweep.lengths(769)
    assert lengths[0] == 4
    assert lengths[-1] == 768  # the full window is always swept
    assert lengths == sorted(set(lengths))


def test_ladder_refinement_is_superset():
    coarse = IntervalSweep(lengths_per_octave=1).lengths(769)
    fine = IntervalSweep(lengths_per_octave=2).lengths(769)
    assert set(coarse) <= set(fine)


def test_sweep_monotone_under_refinement():
    w = power_weight(0.5, 0.0, Grid(-2.0, 2.0, 1025))
    vals = [a2_characteristic(w, IntervalSweep(lengths_per_octave=k))
            for k in (1, 2, 4)]
    assert vals[0] <= vals[1] <= vals[2]


def test_ladder_validation():
    with pytest.raises(DomainError):
        IntervalSweep(min_cells=0)
    with pytest.raises(DomainError):
        IntervalSweep(lengths_per_octave=0)
    with pytest.raises(DomainError):
        IntervalSweep(min_cells=500).lengths(100)


def test_max_cells_truncates_ladder():
    lengths = IntervalSweep(max_cells=64).lengths(769)
    assert lengths[-1] == 64


# ---------------------------------------------------------------------------
# translation
# ---------------------------------------------------------------------------

def test_translation_keeps_interior_samples_bitwise():
    w = power_weight(0.3, 0.0)
    s = 32 * w.grid.h  # exactly 0.5 on the default grid
    t = translate_weight(w, s)
    assert np.array_equal(t.samples[:-32], w.samples[32:])
    assert t.param("shift") == s


def test_translation_preserves_characteristic_when_feature_stays():
    w = power_weight(0.3, 0.0)
    t = translate_weight(w, 0.5)
    assert t.a2_estimate == pytest.approx(w.a2_estimate, rel=1e-10)


def test_translation_of_constant_is_exact():
    t = translate_weight(constant_weight(), 1.0)
    assert t.a2_estimate == 1.0


def test_translation_warns_when_feature_leaves_window():
    w = power_weight(0.3, 3.0)  # feature at u = 3, window tops out at 4
    with pytest.warns(CoverageWarning):
        translate_weight(w, -2.0)  # feature moves to u = 5


def test_translation_requires_lattice_multiple():
    w = constant_weight()
    with pytest.raises(DomainError):
        translate_weight(w, 0.01)


# ---------------------------------------------------------------------------
# canonical family and identifiers
# ---------------------------------------------------------------------------

def test_registered_family_shape():
    fam = registered_family()
    assert len(fam) == 16
    ids = [weight_id(w) for w in fam]
    assert len(set(ids)) == 16
    assert ids[0] == "constant"
    assert all(w.a2_estimate >= 1.0 for w in fam)


def test_registered_family_deterministic():
    a = registered_family()
    b = registered_family()
    for wa, wb in zip(a, b):
        assert weight_id(wa) == weight_id(wb)
        assert wa.a2_estimate == wb.a2_estimate
        assert np.array_equal(wa.samples, wb.samples)


FROZEN_A2 = {
    "power:a=-0.7:center=0": 2.533341096873854,
    "power:a=-0.3:center=0": 1.145846560327094,
    "power:a=0.3:center=0": 1.145846560327094,
    "power:a=0.7:center=0": 2.533341096873854,
    "clamped_exponential:rate=1:clamp=2": 8.226831619954554,
    "clamped_exponential:rate=2:clamp=3": 59.16804499845193,
    "piecewise_step:edge=0:lo=1:hi=5": 1.799996948242255,
}


def test_registered_family_frozen_characteristics():
    by_id = {weight_id(w): w for w in registered_family()}
    for key, expected in FROZEN_A2.items():
        assert by_id[key].a2_estimate == pytest.approx(expected, rel=1e-12), key


def test_weight_id_round_trip():
    for w in registered_family():
        back = parse_weight_id(weight_id(w))
        assert weight_id(back) == weight_id(w)
        assert np.array_equal(back.samples, w.samples)


def test_weight_id_round_trip_with_shift():
    t = translate_weight(power_weight(0.3, 0.0), 0.5)
    assert weight_id(t) == "power:a=0.3:center=0:shift=0.5"
    back = parse_weight_id(weight_id(t))
    assert np.array_equal(back.samples, t.samples)


@pytest.mark.parametrize("bad", [
    "gaussian:a=1",
    "power",
    "power:a",
    "power:a=x",
    "power:b=0.3",
    "clamped_exponential:rate=1",
])
def test_parse_weight_id_rejects(bad):
    with pytest.raises(DomainError):
        parse_weight_id(bad)


# ---------------------------------------------------------------------------
# constructor validation
# ---------------------------------------------------------------------------

def test_constructor_domains():
    with pytest.raises(DomainError):
        power_weight(1.0)
    with pytest.raises(DomainError):
        power_weight(-1.5)
    with pytest.raises(DomainError):
        clamped_exponential_weight(0.0, 1.0)
    with pytest.raises(DomainError):
        clamped_exponential_weight(1.0, 0.0)
    with pytest.raises(DomainError):
        step_weight(0.0, 1.0)
    with pytest.raises(DomainError):
        constant_weight(value=-2.0)


def test_weight_container_validation():
    w = constant_weight()
    with pytest.raises(DomainError):
        Weight(w.family, w.params, w.grid, w.samples[:-1], 1.0)
    with pytest.raises(DomainError):
        Weight(w.family, w.params, w.grid, w.samples, 0.5)
    with pytest.raises(ValueError):
        w.samples[0] = 2.0  # write-locked


def test_a2_report_fields():
    r = a2_scan(constant_weight())
    assert isinstance(r, A2Report)
    assert r.value == 1.0
    assert r.interval[0] < r.interval[1]

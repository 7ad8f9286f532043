import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cigarlab import faults
from cigarlab.errors import DomainError, TipProximityError
from cigarlab.geodesics import (
    ConservedPair,
    GeodesicState,
    Kind,
    StepOptions,
    closed_form_s,
    conserved,
    corrupt,
    equation_residual,
    geodesic_rhs,
    integrate,
    integrate_cartesian,
    printed_r_min,
    radial_equation_check,
    state_from_conserved,
    state_to_cartesian,
    turning_point,
)


def test_rhs_examples():
    assert geodesic_rhs(GeodesicState(0.0, 1.0, 0.0, 1.0, 0.0)) == (1.0, 0.0, 0.0, 0.0)
    t = math.tanh(1.0)
    sd, td, sdd, tdd = geodesic_rhs(GeodesicState(0.0, 1.0, 0.0, 0.5, 2.0))
    assert sdd == pytest.approx(t * (1 - t * t) * 4.0)
    assert tdd == pytest.approx(-2.0 * (1 - t * t) / t * 0.5 * 2.0)
    with pytest.raises(TipProximityError):
        geodesic_rhs(GeodesicState(0.0, 1e-8, 0.0, 0.0, 1.0))


def test_radial_line():
    tr = integrate(GeodesicState(0.0, 1.0, 0.2, 1.0, 0.0), (0.0, 5.0))
    assert tr.kind is Kind.RADIAL and tr.turning_point is None
    for sig in (0.0, 2.5, 5.0):
        s, th, sd, td = tr.at(sig)
        assert s == pytest.approx(1.0 + sig, abs=1e-9) and th == 0.2 and td == 0.0


def test_radial_inbound_stops_at_tip():
    tr = integrate(GeodesicState(0.0, 1.0, 0.0, -1.0, 0.0), (0.0, 3.0))
    assert tr.tip_sigma == pytest.approx(1.0, abs=1e-5)
    assert tr.states[-1].s == pytest.approx(0.0, abs=1e-5)


def test_turning_point_example():
    pair = ConservedPair(0.6, 1.0)
    s_min, r_min = turning_point(pair, 1.0)
    assert s_min == pytest.approx(math.log(2.0), rel=1e-14)
    assert r_min == pytest.approx(0.75, rel=1e-14)
    assert printed_r_min(pair, 1.0) == pytest.approx(1.0 / r_min)
    assert not ConservedPair(0.6, 0.36).admissible
    with pytest.raises(DomainError):
        turning_point(ConservedPair(0.6, 0.36), 1.0)


def test_closed_form_examples():
    pair = ConservedPair(0.6, 1.0)
    assert closed_form_s(pair, 0.0) == pytest.approx(math.log(2.0), rel=1e-12)
    w = math.sqrt(0.64)
    expected = math.acosh(1.25 * math.cosh(w * 2.0))
    assert closed_form_s(pair, [-2.0, 2.0]) == pytest.approx([expected, expected])


def test_trace_matches_closed_form_and_turning_point():
    pair = ConservedPair(0.6, 1.0)
    s_min, r_min = turning_point(pair, 1.0)
    start = state_from_conserved(pair, s_min + 1.0, inbound=True, sigma=-5.0)
    tr = integrate(start, (-5.0, 5.0))
    assert not tr.failed and tr.sign_changes == 1
    assert tr.turning_point.r_min == pytest.approx(r_min, rel=1e-8)
    sig0 = tr.turning_point.sigma
    for st_ in tr.states[::5]:
        assert st_.s == pytest.approx(float(closed_form_s(pair, st_.sigma - sig0)), abs=1e-7)
    assert radial_equation_check(tr) < 1e-8
    assert equation_residual(tr) < 1e-6


def test_corrupted_state_is_detected():
    pair = ConservedPair(0.6, 1.0)
    tr = integrate(state_from_conserved(pair, math.log(2.0)), (-3.0, 3.0))
    bad = corrupt(tr, len(tr.states) // 2, 0.3)
    assert radial_equation_check(bad) > 0.05


@pytest.mark.parametrize("ell, k", [(0.3, 1.0), (0.6, 1.0), (1.0, 1.5), (-0.5, 2.0)])
def test_non_radial_geodesics_escape(ell, k):
    pair = ConservedPair(ell, k)
    s_min = turning_point(pair, 1.0)[0]
    T = 5.0 / math.sqrt(k - ell * ell)
    tr = integrate(state_from_conserved(pair, s_min), (-T, T))
    s = np.array([st_.s for st_ in tr.states])
    sig = np.array([st_.sigma for st_ in tr.states])
    assert np.all(np.diff(s[sig < 0]) < 0) and np.all(np.diff(s[sig > 0]) > 0)
    assert s[0] > 3 * s_min and s[-1] > 3 * s_min
    theta = np.array([st_.theta for st_ in tr.states])
    assert np.all(np.sign(ell) * np.diff(theta) > 0)
    assert np.sign(tr.winding) == np.sign(ell)


def test_force_fault_breaks_the_closed_form():
    pair = ConservedPair(0.6, 1.0)
    with faults.inject("geodesic_force_sign"):
        try:
            tr = integrate(state_from_conserved(pair, math.log(2.0)), (0.0, 3.0))
        except TipProximityError:
            return
    assert abs(tr.states[-1].s - float(closed_form_s(pair, tr.states[-1].sigma))) > 1e-3


def test_cartesian_cross_check():
    pair = ConservedPair(0.6, 1.0)
    E = 2.0
    start = state_from_conserved(pair, 1.2)
    polar = integrate(start, (0.0, 3.0), StepOptions(E=E))
    xy0, v0 = state_to_cartesian(start, E)
    cart = integrate_cartesian(xy0, v0, (0.0, 3.0), E)
    for sig in (1.0, 2.0, 3.0):
        s, th = polar.at(sig)[:2]
        r = math.sqrt(E) * math.sinh(s)
        assert cart.position(sig) == pytest.approx([r * math.cos(th), r * math.sin(th)], abs=1e-7)


def test_cartesian_mode_passes_through_the_tip():
    cart = integrate_cartesian([1.0, 0.0], [-1.0, 0.0], (0.0, 4.0))
    assert cart.xy[-1, 0] < -1.0 and np.allclose(cart.xy[:, 1], 0.0)


@settings(max_examples=15)
@given(ell=st.floats(0.05, 1.0), extra=st.floats(0.05, 2.0), s0=st.floats(0.0, 2.0))
def test_conserved_quantities_hold(ell, extra, s0):
    pair = ConservedPair(ell, ell * ell + extra)
    s_min = turning_point(pair, 1.0)[0]
    tr = integrate(state_from_conserved(pair, s_min + s0), (-10.0, 10.0))
    assert not tr.failed
    c = conserved(tr.states[-1])
    assert c.ell == pytest.approx(ell, abs=1e-7) and c.k == pytest.approx(pair.k, abs=1e-7)


def test_state_from_conserved_rejects_inner_radius():
    with pytest.raises(DomainError):
        state_from_conserved(ConservedPair(0.6, 1.0), 0.3)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cigarlab.charts import (
    ChartKind,
    ChartPoint,
    SolitonParams,
    cartesian_polar,
    chart_jacobian,
    convert,
    from_geodesic_polar,
    to_geodesic_polar,
    wrap_angle,
)
from cigarlab.errors import DomainError

E1 = SolitonParams()
E4 = SolitonParams.testing_with_raw_E(4.0)

radii = st.floats(min_value=1e-3, max_value=50.0)
angles = st.floats(min_value=-20.0, max_value=20.0)
Es = st.floats(min_value=0.05, max_value=20.0)
kinds = st.sampled_from(list(ChartKind))


def test_E_is_derived_from_rho_and_t():
    p = SolitonParams(rho=0.25, t=0.2)
    assert p.E == pytest.approx(math.exp(4 * 0.5 * 0.2), rel=1e-15)
    assert SolitonParams().E == 1.0


def test_to_geodesic_polar_examples():
    q = to_geodesic_polar(ChartPoint.polar(math.sinh(1.0), 0.0), E1)
    assert q.c1 == pytest.approx(1.0, abs=1e-15) and q.c2 == 0.0
    q = to_geodesic_polar(ChartPoint.polar(3.0, math.pi), E4)
    assert q.c1 == pytest.approx(1.19476, abs=1e-5)
    assert q.c1 == pytest.approx(math.asinh(1.5), rel=1e-15)
    assert to_geodesic_polar(ChartPoint.polar(1e-9, 0.3), E1).c1 == pytest.approx(1e-9, rel=1e-12)


def test_from_geodesic_polar_examples():
    assert from_geodesic_polar(ChartPoint.geodesic_polar(1.0, 0.0), E1).c1 == pytest.approx(math.sinh(1.0), rel=1e-15)
    assert from_geodesic_polar(ChartPoint.geodesic_polar(math.log(2.0), 0.0), E1).c1 == pytest.approx(0.75, rel=1e-15)


def test_cartesian_polar_examples():
    p = cartesian_polar(ChartPoint.cartesian(1.0, 0.0))
    assert (p.kind, p.c1, p.c2) == (ChartKind.POLAR, 1.0, 0.0)
    p = cartesian_polar(ChartPoint.polar(2.0, math.pi / 2))
    assert p.c1 == pytest.approx(0.0, abs=1e-15) and p.c2 == pytest.approx(2.0)
    p = cartesian_polar(ChartPoint.cartesian(1.0, 1.0))
    assert p.c1 == pytest.approx(math.sqrt(2.0)) and p.c2 == pytest.approx(math.pi / 4)


def test_domain_errors():
    with pytest.raises(DomainError):
        ChartPoint.polar(0.0, 1.0)
    with pytest.raises(DomainError):
        ChartPoint.geodesic_polar(-1.0, 0.0)
    with pytest.raises(DomainError):
        cartesian_polar(ChartPoint.cartesian(0.0, 0.0))
    with pytest.raises(DomainError):
        chart_jacobian(ChartPoint.polar(1e-9, 0.0), ChartKind.CARTESIAN)
    with pytest.raises(DomainError):
        chart_jacobian(ChartPoint.cartesian(0.0, 0.0), ChartKind.POLAR)
    with pytest.raises(DomainError):
        SolitonParams.testing_with_raw_E(-1.0)


def test_jacobian_examples():
    assert np.allclose(chart_jacobian(ChartPoint.polar(1.0, 0.0), ChartKind.CARTESIAN), np.eye(2), atol=1e-15)
    p = ChartPoint.polar(3.0, 0.4)
    s = math.asinh(3.0 / 2.0)
    J = chart_jacobian(p, ChartKind.GEODESIC_POLAR, E4)
    assert np.allclose(J, np.diag([1.0 / (2.0 * math.cosh(s)), 1.0]), rtol=1e-14)


def test_angles_stay_unwrapped():
    q = convert(ChartPoint.geodesic_polar(1.0, 7.5), ChartKind.POLAR, E1)
    assert q.c2 == 7.5
    assert wrap_angle(7.5) == pytest.approx(7.5 - 2 * math.pi)


@given(r=radii, th=angles, E=Es)
def test_round_trip_polar_geodesic(r, th, E):
    params = SolitonParams.testing_with_raw_E(E)
    p = ChartPoint.polar(r, th)
    back = from_geodesic_polar(to_geodesic_polar(p, params), params)
    assert back.c1 == pytest.approx(r, rel=1e-12)
    assert back.c2 == th


@given(x=st.floats(-30, 30), y=st.floats(-30, 30))
def test_round_trip_cartesian_polar(x, y):
    if math.hypot(x, y) < 1e-6:
        return
    back = cartesian_polar(cartesian_polar(ChartPoint.cartesian(x, y)))
    scale = max(1.0, math.hypot(x, y))
    assert back.c1 == pytest.approx(x, abs=1e-12 * scale)
    assert back.c2 == pytest.approx(y, abs=1e-12 * scale)


@given(r=radii, th=angles, E=Es, src=kinds, mid=kinds, dst=kinds)
def test_jacobian_chain_rule(r, th, E, src, mid, dst):
    params = SolitonParams.testing_with_raw_E(E)
    p = convert(ChartPoint.polar(r, th), src, params)
    q = convert(p, mid, params)
    direct = chart_jacobian(p, dst, params)
    composed = chart_jacobian(q, dst, params) @ chart_jacobian(p, mid, params)
    assert np.allclose(direct, composed, rtol=1e-10, atol=1e-10 * np.max(np.abs(direct)))


@given(r=radii, th=angles, E=Es, src=kinds, dst=kinds)
def test_jacobian_inverse(r, th, E, src, dst):
    params = SolitonParams.testing_with_raw_E(E)
    p = convert(ChartPoint.polar(r, th), src, params)
    q = convert(p, dst, params)
    prod = chart_jacobian(q, src, params) @ chart_jacobian(p, dst, params)
    assert np.allclose(prod, np.eye(2), atol=1e-12 * max(1.0, r, 1.0 / r))


@given(r=radii, th=angles, src=kinds)
def test_jacobian_matches_finite_differences(r, th, src):
    """The analytic Jacobian agrees with a central difference of the transform."""
    params = E4
    p = convert(ChartPoint.polar(r, th), src, params)
    for dst in ChartKind:
        J = chart_jacobian(p, dst, params)
        h = 1e-6 * max(1.0, abs(p.c1))
        cols = []
        for i in range(2):
            d = np.zeros(2)
            d[i] = h
            diff = convert(ChartPoint(src, *(p.coords + d)), dst, params).coords
            diff -= convert(ChartPoint(src, *(p.coords - d)), dst, params).coords
            if dst is not ChartKind.CARTESIAN:
                diff[1] = (diff[1] + math.pi) % (2 * math.pi) - math.pi
            cols.append(diff / (2 * h))
        assert np.allclose(J, np.column_stack(cols), rtol=1e-5, atol=1e-6 * np.max(np.abs(J)))

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cigarlab.calculus import gauss_curvature
from cigarlab.charts import ChartKind, ChartPoint, SolitonParams, convert
from cigarlab.errors import ChartMismatchError, GeometryError
from cigarlab.fields import default_sample
from cigarlab.metrics import (
    Family,
    MetricSpec,
    asymptotic_profile,
    cigar,
    cigar_with_raw_E_for_testing,
    flat,
    metric_at,
    metric_field,
    metric_from_json,
    metric_in_chart_via,
    min_eigenvalue,
    potential_function,
    product,
    warped,
)
from cigarlab.profiles import tanh_shift_profile

from conftest import SQRT_E1

CART, POLAR, GEO = ChartKind.CARTESIAN, ChartKind.POLAR, ChartKind.GEODESIC_POLAR


def test_metric_at_examples():
    assert np.array_equal(metric_at(cigar(), ChartPoint.cartesian(0.0, 0.0)), np.eye(2))
    assert np.allclose(metric_at(cigar(chart=GEO), ChartPoint.geodesic_polar(1.0, 0.0)), np.diag([1.0, math.tanh(1.0) ** 2]))
    m = metric_at(cigar_with_raw_E_for_testing(4.0, POLAR), ChartPoint.polar(2.0, 0.5))
    assert np.allclose(m, np.diag([1.0 / 8.0, 4.0 / 8.0]), rtol=1e-15)


def test_metric_at_rejects_wrong_chart():
    with pytest.raises(ChartMismatchError):
        metric_at(cigar(), ChartPoint.polar(1.0, 0.0))


def test_potential_function_examples():
    assert potential_function(SolitonParams(), ChartPoint.cartesian(0.0, 0.0)) == 0.0
    assert potential_function(SolitonParams(), ChartPoint.polar(SQRT_E1, 1.0)) == pytest.approx(-1.0, rel=1e-15)
    half = SolitonParams(rho=0.5, t=0.7)
    assert potential_function(half, ChartPoint.cartesian(3.0, -2.0)) == 0.0


def test_potential_function_is_chart_independent():
    params = SolitonParams(0.25, 0.2)
    p = ChartPoint.geodesic_polar(1.3, 0.4)
    values = [potential_function(params, convert(p, k, params)) for k in ChartKind]
    assert np.allclose(values, values[0], rtol=1e-14)


def test_asymptotic_profile():
    rep = asymptotic_profile(cigar())
    assert rep.ok()
    assert dict(rep.samples)[1.0] == pytest.approx(0.76159, abs=1e-5)


@given(s=st.floats(0.01, 6.0), th=st.floats(-4, 4), E=st.floats(0.1, 10.0))
def test_polar_and_geodesic_forms_agree(s, th, E):
    spec = cigar_with_raw_E_for_testing(E, GEO)
    p = ChartPoint.geodesic_polar(s, th)
    direct = metric_at(spec, p)
    for via in (POLAR, CART):
        assert np.allclose(metric_in_chart_via(spec, p, via), direct, rtol=1e-9, atol=1e-12)


@given(x=st.floats(-20, 20), y=st.floats(-20, 20), E=st.floats(0.1, 10.0))
def test_cartesian_form_is_conformally_flat(x, y, E):
    m = metric_at(cigar_with_raw_E_for_testing(E), ChartPoint.cartesian(x, y))
    assert np.array_equal(m, np.eye(2) / (E + x * x + y * y))


def test_positivity_and_positive_curvature():
    for rho, t in ((0.0, 0.0), (-0.5, 0.2), (0.25, 0.2)):
        spec = cigar(rho, t)
        pts = default_sample(CART, spec.params, n=30) + [ChartPoint.cartesian(0.0, 0.0)]
        assert min_eigenvalue(spec, pts) > 0.0
        g = metric_field(spec)
        assert min(gauss_curvature(g, p) for p in pts) > 0.0


def test_warped_and_product_families():
    g = warped(tanh_shift_profile())
    assert np.allclose(metric_at(g, ChartPoint.geodesic_polar(1.0, 0.0)), metric_at(cigar(chart=GEO), ChartPoint.geodesic_polar(1.0, 0.0)))
    assert np.array_equal(metric_at(product(), ChartPoint.cartesian(1.0, 2.0)), np.eye(2))
    with pytest.raises(ChartMismatchError):
        MetricSpec(Family.WARPED, CART)
    with pytest.raises(GeometryError):
        MetricSpec(Family.CONFORMAL_FLAT, CART)


def test_metric_json_round_trip():
    spec = metric_from_json({"family": "cigar_rb", "rho": 0.25, "t": 0.2, "chart": "polar"})
    assert spec.chart is POLAR and spec.params.E == pytest.approx(math.exp(0.4))
    again = metric_from_json(spec.to_json() | {"E": 99.0})
    assert again.params.E == pytest.approx(spec.params.E)
    raw = metric_from_json({"family": "cigar_rb", "E": 4.0})
    assert raw.params.E == 4.0
    w = metric_from_json({"family": "warped", "warp": {"kind": "tanh_shift", "shift": 0.3}})
    assert w.warp(0.0) == pytest.approx(0.3)
    assert metric_from_json({"family": "flat"}) == flat()

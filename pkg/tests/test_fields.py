import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cigarlab import faults
from cigarlab import finite_diff as fd
from cigarlab.charts import ChartKind, ChartPoint, SolitonParams, convert
from cigarlab.calculus import ScalarField
from cigarlab.errors import ConstraintError, DegenerateRhoError, DegenerateSampleError, FactorUndefinedError, UnknownFieldError
from cigarlab.fields import (
    ClassKind,
    VectorFieldSpec,
    catalog,
    classify,
    conformal_basis,
    conformal_factor_formula,
    default_sample,
    field_from_json,
    mixed_factor_xi,
    product_mixed_factor,
    pushforward,
    rank_of_span,
)
from cigarlab.metrics import cigar, flat, product
from cigarlab.profiles import exp_profile, is_sqrt_quadratic_in, poly_profile, tanh_shift_profile

CART, POLAR, GEO = ChartKind.CARTESIAN, ChartKind.POLAR, ChartKind.GEODESIC_POLAR
E1 = SolitonParams()


def test_catalog_examples():
    p = ChartPoint.cartesian(0.3, -0.7)
    assert np.array_equal(catalog("rotation")(p), [0.7, 0.3])
    assert np.array_equal(catalog("xi", rho=0.5)(p), [0.0, 0.0])
    assert np.allclose(catalog("fifth_basis", E=1.0)(ChartPoint.cartesian(1.0, 0.0)), [math.sqrt(2.0), 0.0])


def test_catalog_errors():
    with pytest.raises(UnknownFieldError):
        catalog("no_such_field")
    with pytest.raises(KeyError):
        catalog("no_such_field")
    with pytest.raises(ConstraintError):
        catalog("radial_mk", A=-1.0, B=0.1)


def test_radial_sign_flag_negates_the_field():
    p = ChartPoint.geodesic_polar(1.0, 0.0)
    plus, minus = catalog("radial_mk", A=1.0, B=1.0), catalog("radial_mk", A=1.0, B=1.0, sign=-1)
    assert np.allclose(minus(p), -plus(p))
    assert plus(p)[0] == pytest.approx(math.sqrt(math.tanh(1.0) ** 2 + 1.0))


def test_field_json():
    V = field_from_json({"name": "mixed_mk", "A": 1.0, "B": 1.0, "C": 0.5})
    assert V.chart is GEO and V(ChartPoint.geodesic_polar(1.0, 0.0))[1] == 0.5
    W = field_from_json({"name": "product_test", "v": {"kind": "poly", "coeffs": [0, 0, 1]}})
    assert W(ChartPoint.cartesian(3.0, 0.0))[0] == pytest.approx(9.0)
    assert field_from_json(V.to_json()) == V


def test_classify_examples():
    d_theta = VectorFieldSpec("d_theta", POLAR, lambda q: np.array([0.0, 1.0]))
    assert classify(d_theta, cigar(chart=POLAR)).kind is ClassKind.KILLING
    dil = classify(catalog("dilation"), cigar())
    assert dil.kind is ClassKind.CONFORMAL
    lam = np.array([c for _, c in dil.lambda_samples])
    assert np.ptp(lam) > 0.1
    mk = classify(catalog("mixed_mk", A=1.0, B=1.0, C=0.0), cigar(chart=GEO))
    assert mk.kind is ClassKind.MIXED_KILLING and not mk.is_conformal and mk.is_mixed_killing


def test_class_hierarchy_flags():
    k = classify(catalog("rotation"), cigar())
    assert k.is_killing and k.is_conformal and k.is_mixed_killing
    n = classify(catalog("radial_test", w=tanh_shift_profile(0.3)), cigar(chart=GEO))
    assert not (n.is_killing or n.is_conformal or n.is_mixed_killing)
    assert n.to_json()["class"] == "none"


def test_xi_factor_matches_closed_form():
    params = SolitonParams(0.25, 0.2)
    sample = default_sample(CART, params)
    fc = classify(catalog("xi", rho=0.25, t=0.2), cigar(0.25, 0.2), sample)
    assert fc.is_mixed_killing and len(fc.f_samples) == len(sample)
    for p, f in fc.f_samples:
        alpha = mixed_factor_xi(params, p)
        if abs(alpha) > 0.01:
            assert f == pytest.approx(alpha, rel=1e-6)


def test_mixed_factor_xi_examples():
    assert mixed_factor_xi(E1, ChartPoint.cartesian(1.0, 0.0)) == 0.0
    assert mixed_factor_xi(E1, ChartPoint.cartesian(0.0, 0.0)) == -4.0
    assert mixed_factor_xi(E1, ChartPoint.cartesian(1e8, 0.0)) == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(DegenerateRhoError):
        mixed_factor_xi(SolitonParams(rho=0.5), ChartPoint.cartesian(1.0, 0.0))


def test_conformal_factor_formula_examples():
    dil = catalog("dilation")
    one = ScalarField(lambda q: 1.0, CART)
    assert conformal_factor_formula(dil, one, ChartPoint.cartesian(0.5, 0.5)) == pytest.approx(2.0)
    rot = catalog("rotation")
    radial_lam = ScalarField(lambda q: 1.0 / (1.0 + q[0] ** 2 + q[1] ** 2), CART)
    p = ChartPoint.cartesian(0.6, 0.2)
    assert conformal_factor_formula(rot, radial_lam, p) == pytest.approx(2.0 * radial_lam(p), rel=1e-10)
    # xi: lambda = c E / D with c = -2, so the conformal factor formula reproduces alpha.
    xi = catalog("xi")
    lam_xi = ScalarField(lambda q: -2.0 / (1.0 + q[0] ** 2 + q[1] ** 2), CART)
    for x in (0.0, 0.4, 1.7):
        q = ChartPoint.cartesian(x, 0.3)
        assert conformal_factor_formula(xi, lam_xi, q) == pytest.approx(mixed_factor_xi(E1, q), abs=1e-8)
    with pytest.raises(FactorUndefinedError):
        conformal_factor_formula(dil, ScalarField(lambda q: 0.0, CART), p)


def test_product_mixed_factor_examples():
    for x in (0.5, 1.0, 2.0):
        assert product_mixed_factor(exp_profile(), x) == pytest.approx(3.0 * math.exp(x), rel=1e-14)
        assert product_mixed_factor(poly_profile([0.0, 1.0]), x) == pytest.approx(2.0)
    with pytest.raises(ZeroDivisionError):
        product_mixed_factor(poly_profile([2.0]), 1.0)


def test_product_classification():
    pts = [ChartPoint.cartesian(x, 0.1) for x in np.linspace(0.5, 2.0, 6)]
    fc = classify(catalog("product_test", v=poly_profile([0.0, 0.0, 1.0])), product(), pts)
    assert fc.kind is ClassKind.MIXED_KILLING
    assert np.allclose([f for _, f in fc.f_samples], [5.0 * p.c1 for p in pts], rtol=1e-8)
    const = classify(catalog("product_test", v=poly_profile([2.0])), product(), pts)
    assert const.kind is ClassKind.KILLING


@pytest.mark.parametrize("name", ["dx", "dy", "rotation", "dilation"])
def test_conformal_basis_against_flat_and_cigar(name):
    V = catalog(name)
    assert classify(V, flat()).is_conformal
    assert classify(V, cigar()).is_conformal


@pytest.mark.parametrize("A, B", [(1.0, 0.0), (1.0, 1.0), (2.0, 0.5), (0.5, 2.0)])
def test_radial_family(A, B):
    fc = classify(catalog("radial_mk", A=A, B=B), cigar(chart=GEO))
    assert fc.is_mixed_killing
    assert fc.is_conformal == (B == 0.0)


def test_perturbed_radial_field_is_not_mixed_killing():
    w = tanh_shift_profile(0.3)
    _, _, rms = is_sqrt_quadratic_in(w, tanh_shift_profile(), np.linspace(0.2, 3.0, 50))
    assert rms > 0.01
    assert classify(catalog("radial_test", w=w), cigar(chart=GEO)).kind is ClassKind.NONE


def test_angular_rigidity():
    g = cigar(chart=POLAR)
    assert classify(catalog("angular_test", v=poly_profile([0.0, 1.0])), g).kind is ClassKind.NONE
    assert classify(catalog("angular_test", v=poly_profile([1.5])), g).kind is ClassKind.KILLING


def test_classification_is_chart_invariant():
    V = catalog("mixed_mk", A=1.0, B=1.0, C=0.3)
    sample = default_sample(GEO)
    a = classify(V, cigar(chart=GEO), sample)
    b = classify(pushforward(V, POLAR, E1), cigar(chart=POLAR), sample)
    assert a.kind is b.kind is ClassKind.MIXED_KILLING
    fa = np.array([f for _, f in a.f_samples])
    fb = np.array([f for _, f in b.f_samples])
    assert np.allclose(fa, fb, rtol=1e-6, atol=1e-6)


def test_degenerate_sample_is_reported():
    """All sample points on the x axis, where L_V g of y^3 d/dx vanishes."""
    V = VectorFieldSpec("cubic", CART, lambda q: np.array([q[1] ** 3, 0.0]))
    pts = [ChartPoint.cartesian(x, 0.0) for x in (0.5, 1.0, 1.5, 2.0)]
    with pytest.raises(DegenerateSampleError):
        classify(V, flat(), pts)


def test_rank_examples():
    sample = default_sample(CART)
    five = conformal_basis() + [catalog("fifth_basis")]
    assert rank_of_span(five, sample) == 5
    assert rank_of_span(five[:4], sample) == 4
    assert rank_of_span([catalog("dx"), catalog("dx"), catalog("dy")], sample) == 2
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert rank_of_span(five, sample, resample_seeds=(1, 2)) == 5


def test_fault_breaks_classification():
    V = catalog("radial_mk", A=1.0, B=1.0)
    assert classify(V, cigar(chart=GEO)).is_mixed_killing
    with faults.inject("lie_transport_sign"):
        assert not classify(V, cigar(chart=GEO)).is_mixed_killing


@given(s=st.floats(0.2, 3.0), th=st.floats(-3, 3), target=st.sampled_from([CART, POLAR]))
def test_pushforward_preserves_the_vector(s, th, target):
    V = catalog("mixed_mk", A=2.0, B=0.5, C=0.7)
    p = ChartPoint.geodesic_polar(s, th)
    W = pushforward(V, target, E1)
    q = convert(p, target, E1)
    back = pushforward(W, GEO, E1)
    assert np.allclose(back(p), V(p), rtol=1e-12, atol=1e-12)
    assert np.linalg.norm(W(q)) > 0.0


@pytest.mark.parametrize("A, B", [(1.0, 0.0), (1.0, 1.0), (2.0, 0.5)])
def test_radial_field_is_smooth_in_cartesian_chart_away_from_tip(A, B):
    W = pushforward(catalog("radial_mk", A=A, B=B), CART, E1)
    for r in (0.2, 0.5, 1.0, 3.0):
        for th in (0.0, 1.0, 2.5):
            q = np.array([r * math.cos(th), r * math.sin(th)])
            d1 = fd.gradient(W.func, q)
            d2 = fd.hessian_matrix(W.func, q)
            assert np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))

"""The acceptance suite: every check compares a computed quantity against an
independent oracle and reports the measured value next to its tolerance."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import faults
from .calculus import ScalarField, conformal_gauss_curvature, gauss_curvature
from .charts import ChartKind, ChartPoint, SolitonParams
from .errors import GeometryError
from .fields import (
    DEFAULT_SEED,
    ClassKind,
    catalog,
    classify,
    conformal_basis,
    conformal_factor_formula,
    default_sample,
    lambda_from_flat,
    mixed_factor_xi,
    product_mixed_factor,
    rank_of_span,
    span_singular_values,
)
from .geodesics import (
    ConservedPair,
    closed_form_s,
    equation_residual,
    integrate,
    printed_r_min,
    state_from_conserved,
    turning_point,
)
from .metrics import (
    cigar,
    cigar_curvature_formula,
    cigar_log_conformal_factor,
    cigar_with_raw_E_for_testing,
    flat,
    metric_field,
    product,
)
from .profiles import exp_profile, poly_profile, tanh_shift_profile
from .report import to_json_text
from .soliton import curvature_along_profile, residual_grid, rigidity_closed_form, rigidity_ode_solve


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    measured: float
    tolerance: float
    details: dict = field(default_factory=dict)
    error: Optional[str] = None
    sense: str = "<"  # how measured relates to tolerance when passing: "<", ">" or "=="

    def to_json(self) -> dict:
        doc = {
            "id": self.id,
            "name": self.name,
            "passed": bool(self.passed),
            "measured": self.measured,
            "tolerance": self.tolerance,
            "sense": self.sense,
            "details": self.details,
        }
        if self.error is not None:
            doc["error"] = self.error
        return doc

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.id:2d} {self.name:<26s} measured {self.measured:.3e} {self.sense} {self.tolerance:.1e}"


SOLITON_GRID = tuple((rho, t) for rho in (-0.5, 0.0, 0.25) for t in (0.0, 0.2))
CURVATURE_R = (0.0, 0.5, 1.0, 2.0, 5.0)
CURVATURE_E = (0.5, 1.0, 4.0)
XI_PARAMS = ((0.0, 0.0), (0.25, 0.2))
RADIAL_AB = ((1.0, 0.0), (1.0, 1.0), (2.0, 0.5))
RIGIDITY_A = (1.0, 4.0)
GEODESIC_GRID = tuple((k, ell) for k in (1.0, 2.0) for ell in (0.2, 0.5, 0.8 * math.sqrt(k)))


def check_soliton_identity(seed: int = DEFAULT_SEED) -> CheckResult:
    tol = 1e-6
    worst, per = 0.0, {}
    for rho, t in SOLITON_GRID:
        m = max(r.norm for r in residual_grid(SolitonParams(rho, t)))
        per[f"rho={rho},t={t}"] = m
        worst = max(worst, m)
    return CheckResult(1, "soliton identity", worst < tol, worst, tol, {"max_by_params": per, "grid_points": 25})


def check_curvature(seed: int = DEFAULT_SEED) -> CheckResult:
    """Brioschi curvature vs both closed forms; the conformal-factor route is a second oracle."""
    tol = 1e-6
    err_lin = err_sq = oracle_gap = 0.0
    for E in CURVATURE_E:
        spec = cigar_with_raw_E_for_testing(E)
        g = metric_field(spec)
        log_u = cigar_log_conformal_factor(spec.params)
        for r in CURVATURE_R:
            p = ChartPoint.cartesian(r, 0.0)
            K = gauss_curvature(g, p)
            K2 = conformal_gauss_curvature(log_u, p)
            oracle_gap = max(oracle_gap, abs(K - K2) / abs(K2))
            err_lin = max(err_lin, abs(K - cigar_curvature_formula(E, r)) / abs(K))
            err_sq = max(err_sq, abs(K - cigar_curvature_formula(E, r, squared_denominator=True)) / abs(K))
    lin_ok, sq_ok = err_lin < tol, err_sq < tol
    matched = "2E/(E+r^2)" if lin_ok and not sq_ok else "2E/(E+r^2)^2" if sq_ok and not lin_ok else "ambiguous"
    passed = (lin_ok != sq_ok) and oracle_gap < tol
    return CheckResult(
        2,
        "curvature formula",
        passed,
        min(err_lin, err_sq),
        tol,
        {"matched": matched, "rel_err_single_denominator": err_lin, "rel_err_squared_denominator": err_sq,
         "brioschi_vs_conformal": oracle_gap},
    )


def check_xi_factor(seed: int = DEFAULT_SEED) -> CheckResult:
    tol, floor = 1e-6, 0.01
    worst, details = 0.0, {}
    passed = True
    for rho, t in XI_PARAMS:
        params = SolitonParams(rho, t)
        g = cigar(rho, t)
        sample = default_sample(ChartKind.CARTESIAN, params, seed=seed)
        fc = classify(catalog("xi", rho=rho, t=t), g, sample)
        if not fc.is_mixed_killing or len(fc.f_samples) != len(sample):
            passed = False
            details[f"rho={rho},t={t}"] = {"class": fc.kind.value, "n_factors": len(fc.f_samples)}
            continue
        err, below, above = 0.0, set(), set()
        for p, f in fc.f_samples:
            alpha = mixed_factor_xi(params, p)
            if abs(alpha) > floor:
                err = max(err, abs(f - alpha) / abs(alpha))
                r = math.hypot(p.c1, p.c2)
                (below if r < params.sqrt_E else above).add(int(np.sign(f)))
        sign_change = len(below) == 1 and len(above) == 1 and below != above
        passed &= err < tol and sign_change
        worst = max(worst, err)
        details[f"rho={rho},t={t}"] = {"class": fc.kind.value, "max_rel_err": err, "sign_change_at_sqrtE": sign_change}
    return CheckResult(3, "xi mixed Killing factor", passed and worst < tol, worst, tol, details)


def check_conformal_algebra(seed: int = DEFAULT_SEED) -> CheckResult:
    tol = 1e-6
    params = SolitonParams()
    sample = default_sample(ChartKind.CARTESIAN, params, seed=seed)
    classes, passed = {}, True
    for V in conformal_basis():
        for label, g in (("flat", flat()), ("cigar", cigar())):
            fc = classify(V, g, sample)
            classes[f"{V.name}/{label}"] = fc.kind.value
            passed &= fc.is_conformal
    dil = catalog("dilation")
    fc = classify(dil, cigar(), sample)
    log_u = cigar_log_conformal_factor(params)
    lam_field = ScalarField(lambda q: params.E / (params.E + q[0] * q[0] + q[1] * q[1]), ChartKind.CARTESIAN, params)
    err_chain = err_closed = err_f = 0.0
    f_by_point = {(p.c1, p.c2): f for p, f in fc.f_samples}
    for p, lam in fc.lambda_samples:
        chain = lambda_from_flat(dil, log_u, 1.0, p)
        closed = float(lam_field.func(p.coords))
        err_chain = max(err_chain, abs(lam - chain) / abs(chain))
        err_closed = max(err_closed, abs(lam - closed) / abs(closed))
        if (p.c1, p.c2) in f_by_point:
            f_formula = conformal_factor_formula(dil, lam_field, p)
            err_f = max(err_f, abs(f_by_point[(p.c1, p.c2)] - f_formula) / max(1.0, abs(f_formula)))
    has_lambda = len(fc.lambda_samples) == len(sample)
    measured = max(err_chain, err_closed, err_f)
    passed &= has_lambda and len(fc.f_samples) == len(sample) and measured < tol
    return CheckResult(
        4,
        "conformal algebra",
        passed,
        measured,
        tol,
        {"classes": classes, "lambda_vs_flat_chain": err_chain, "lambda_vs_E_over_D": err_closed,
         "f_vs_conformal_formula": err_f},
    )


def check_dimension_five(seed: int = DEFAULT_SEED) -> CheckResult:
    tol = 1e-6
    params = SolitonParams()
    five = conformal_basis() + [catalog("fifth_basis")]
    ratios, ranks5, ranks4 = [], [], []
    for s in (seed, seed + 1, seed + 2):
        sample = default_sample(ChartKind.CARTESIAN, params, seed=s)
        sv = span_singular_values(five, sample, params)
        ratios.append(float(sv[4] / sv[0]))
        ranks5.append(rank_of_span(five, sample, params=params))
        ranks4.append(rank_of_span(five[:4], sample, params=params))
    ok = all(r == 5 for r in ranks5) and all(r == 4 for r in ranks4) and min(ratios) > tol
    return CheckResult(
        5, "mixed Killing dimension", ok, min(ratios), tol,
        {"sigma5_over_sigma1": ratios, "rank5": ranks5, "rank4": ranks4, "seeds": [seed, seed + 1, seed + 2]},
        sense=">",
    )


def check_angular_rigidity(seed: int = DEFAULT_SEED) -> CheckResult:
    g = cigar(chart=ChartKind.POLAR)
    linear = classify(catalog("angular_test", v=poly_profile([0.0, 1.0])), g)
    const = classify(catalog("angular_test", v=poly_profile([1.0])), g)
    wrong = int(linear.kind is not ClassKind.NONE) + int(const.kind is not ClassKind.KILLING)
    residual = linear.vs_first.relative_residual if linear.vs_first is not None else 0.0
    return CheckResult(
        6, "angular rigidity", wrong == 0, wrong, 0, sense="==",
        details={"v=r": linear.kind.value, "v=const": const.kind.value, "v=r_residual_vs_first": residual,
                 "measured_is_misclassified_count": True},
    )


def check_radial_family(seed: int = DEFAULT_SEED) -> CheckResult:
    g = cigar(chart=ChartKind.GEODESIC_POLAR)
    classes, wrong = {}, 0
    for A, B in RADIAL_AB:
        fc = classify(catalog("radial_mk", A=A, B=B), g)
        classes[f"A={A},B={B}"] = fc.kind.value
        wrong += fc.kind is not (ClassKind.CONFORMAL if B == 0.0 else ClassKind.MIXED_KILLING)
    bad = classify(catalog("radial_test", w=tanh_shift_profile(0.3)), g)
    classes["tanh+0.3"] = bad.kind.value
    wrong += bad.kind is not ClassKind.NONE
    residual = bad.vs_first.relative_residual if bad.vs_first is not None else 0.0
    return CheckResult(
        7, "radial family", wrong == 0, wrong, 0, sense="==",
        details={"classes": classes, "perturbed_residual": residual, "measured_is_misclassified_count": True},
    )


def check_rigidity_ode(seed: int = DEFAULT_SEED) -> CheckResult:
    tol = 1e-8
    worst, min_K, details = 0.0, math.inf, {}
    for A in RIGIDITY_A:
        prof = rigidity_ode_solve(A, 8.0)
        err = float(np.max(np.abs(prof.h_values - rigidity_closed_form(A, prof.grid))))
        K = curvature_along_profile(prof, prof.grid[1:])
        worst, min_K = max(worst, err), min(min_K, float(np.min(K)))
        details[f"A={A}"] = {"max_abs_err": err, "min_K": float(np.min(K))}
    return CheckResult(8, "rigidity ODE", worst < tol and min_K > 0.0, worst, tol, details)


def check_geodesics(seed: int = DEFAULT_SEED) -> CheckResult:
    tol_drift, tol_closed, tol_rmin, tol_eq = 1e-8, 1e-6, 1e-7, 1e-6
    E = 1.0
    drift = closed = rmin_err = eq = 0.0
    relation, ok = [], True
    for k, ell in GEODESIC_GRID:
        pair = ConservedPair(ell, k)
        s_min, r_min = turning_point(pair, E)
        anchored = integrate(state_from_conserved(pair, s_min), (-5.0, 5.0))
        drift = max(drift, anchored.drift_ell, anchored.drift_k)
        sig = np.array([st.sigma for st in anchored.states])
        s = np.array([st.s for st in anchored.states])
        closed = max(closed, float(np.max(np.abs(s - closed_form_s(pair, sig)))))
        eq = max(eq, equation_residual(anchored))

        # Start away from the turning point so the minimum radius is found, not given.
        start = state_from_conserved(pair, s_min + 1.0, inbound=True, sigma=-5.0)
        free = integrate(start, (-5.0, 5.0))
        drift = max(drift, free.drift_ell, free.drift_k)
        tp = free.turning_point
        if tp is None or free.sign_changes != 1:
            ok = False
            continue
        observed = min(tp.r_min, float(np.min(free.r_values())))
        rmin_err = max(rmin_err, abs(observed - r_min))
        printed = printed_r_min(pair, E)
        relation.append({"k": k, "ell": ell, "r_min_observed": observed, "r_min_arcsinh": r_min,
                         "r_min_printed": printed, "observed_times_printed_over_E": observed * printed / E})
    matches_printed = all(abs(d["r_min_observed"] - d["r_min_printed"]) < tol_rmin for d in relation)
    reciprocal = all(abs(d["observed_times_printed_over_E"] - 1.0) < 1e-6 for d in relation)
    ok &= drift < tol_drift and closed < tol_closed and rmin_err < tol_rmin and eq < tol_eq
    return CheckResult(
        9, "geodesics", ok, max(drift / tol_drift, closed / tol_closed, rmin_err / tol_rmin, eq / tol_eq), 1.0,
        {"max_drift": drift, "max_closed_form_err": closed, "max_r_min_err": rmin_err, "max_equation_residual": eq,
         "printed_r_min_matches_trace": matches_printed, "printed_r_min_is_E_over_r_min": reciprocal,
         "grid": relation, "measured_is_worst_ratio_to_tolerance": True},
    )


def check_product_factors(seed: int = DEFAULT_SEED) -> CheckResult:
    tol = 1e-8
    pts = [ChartPoint.cartesian(float(x), 0.3 * i) for i, x in enumerate(np.linspace(0.5, 2.0, 10))]
    worst, details, ok = 0.0, {}, True
    for label, v in (("exp", exp_profile()), ("x", poly_profile([0.0, 1.0])), ("x^2", poly_profile([0.0, 0.0, 1.0]))):
        fc = classify(catalog("product_test", v=v), product(), pts)
        if len(fc.f_samples) != len(pts):
            ok = False
            details[label] = {"class": fc.kind.value, "n_factors": len(fc.f_samples)}
            continue
        err = max(abs(f - product_mixed_factor(v, p.c1)) / max(1.0, abs(product_mixed_factor(v, p.c1)))
                  for p, f in fc.f_samples)
        worst = max(worst, err)
        details[label] = {"class": fc.kind.value, "max_rel_err": err}
    return CheckResult(10, "product factors", ok and worst < tol, worst, tol, details)


CHECKS: tuple[Callable[[int], CheckResult], ...] = (
    check_soliton_identity,
    check_curvature,
    check_xi_factor,
    check_conformal_algebra,
    check_dimension_five,
    check_angular_rigidity,
    check_radial_family,
    check_rigidity_ode,
    check_geodesics,
    check_product_factors,
)


def _guarded(check: Callable[[int], CheckResult], idx: int, seed: int) -> CheckResult:
    try:
        return check(seed)
    except GeometryError as exc:
        return CheckResult(idx, check.__name__.removeprefix("check_").replace("_", " "), False, math.inf, 0.0,
                           error=f"{type(exc).__name__}: {exc}")


def run_checks(seed: int = DEFAULT_SEED, only: Optional[Sequence[int]] = None) -> list[CheckResult]:
    return [_guarded(c, i, seed) for i, c in enumerate(CHECKS, start=1) if only is None or i in only]


def results_document(results: Sequence[CheckResult], seed: int, fault_names: Sequence[str] = ()) -> dict:
    return {
        "seed": seed,
        "faults": sorted(fault_names),
        "all_passed": all(r.passed for r in results),
        "checks": [r.to_json() for r in results],
    }


def check_reproducibility(seed: int, first_doc: dict, fault_names: Sequence[str] = ()) -> CheckResult:
    """Recompute checks 1 to 10 and compare the serialised documents byte for byte."""
    again = results_document(run_checks(seed), seed, fault_names)
    same = to_json_text(first_doc) == to_json_text(again)
    return CheckResult(11, "reproducibility", same, 0 if same else 1, 0, {"identical": same}, sense="==")


def full_suite(seed: int = DEFAULT_SEED, fault_names: Sequence[str] = (), reproducibility: bool = True) -> dict:
    with faults.inject(*fault_names):
        results = run_checks(seed)
        doc = results_document(results, seed, fault_names)
        if reproducibility:
            results.append(check_reproducibility(seed, doc, fault_names))
    return results_document(results, seed, fault_names)

"""Soliton identity residuals and the rotationally symmetric rigidity ODE."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import finite_diff as fd
from .calculus import ScalarField, SymTensorField, gauss_curvature, hessian, ricci_by_contraction
from .charts import ChartKind, ChartPoint, SolitonParams, convert
from .errors import DomainError, ParameterInconsistencyError, StepSizeError
from .metrics import TIP_SWITCH, MetricSpec, Family, metric_field, potential_field, warped
from .profiles import Profile


@dataclass(frozen=True)
class SolitonResidual:
    point: ChartPoint
    residual: np.ndarray
    norm: float
    rho: float
    t: float


def residual_for(g: SymTensorField, f: ScalarField, rho: float, p: ChartPoint, contraction: bool = False, step=fd.DEFAULT_STEP) -> np.ndarray:
    """``Ric + Hess f - rho R g`` at ``p`` for any metric and potential.

    ``Ric`` is ``K g`` unless ``contraction`` is set, in which case it is
    contracted from the Riemann tensor instead.
    """
    K = gauss_curvature(g, p, step)
    m = g(p)
    ric = ricci_by_contraction(g, p, step) if contraction else K * m
    return ric + hessian(g, f, p, step) - rho * 2.0 * K * m


def _cigar_chart_for(p: ChartPoint) -> ChartKind:
    if p.kind.singular_at_tip and p.c1 < TIP_SWITCH:
        return ChartKind.CARTESIAN
    return p.kind


def soliton_residual(params: SolitonParams, p: ChartPoint, contraction: bool = False) -> SolitonResidual:
    """Residual of the steady gradient soliton identity for the cigar at ``p``.

    Points within ``TIP_SWITCH`` of the tip of a polar chart are moved to the
    Cartesian chart; the returned ``point`` says where the tensor lives.
    """
    chart = _cigar_chart_for(p)
    p = convert(p, chart, params)
    g = metric_field(MetricSpec(Family.CIGAR_RB, chart, params))
    f = potential_field(params, chart)
    res = residual_for(g, f, params.rho, p, contraction)
    return SolitonResidual(p, res, float(np.linalg.norm(res)), params.rho, params.t)


def hessian_reduction_check(params: SolitonParams, p: ChartPoint) -> float:
    """``|| Hess f - (rho - 1/2) R g ||_F`` at ``p`` (zero on the cigar)."""
    chart = _cigar_chart_for(p)
    p = convert(p, chart, params)
    g = metric_field(MetricSpec(Family.CIGAR_RB, chart, params))
    f = potential_field(params, chart)
    R = 2.0 * gauss_curvature(g, p)
    return float(np.linalg.norm(hessian(g, f, p) - (params.rho - 0.5) * R * g(p)))


def residual_grid_points(n: int = 25, r_max: float = 5.0) -> list[ChartPoint]:
    """``n`` Cartesian points with radii evenly spaced on ``[0, r_max]`` and golden-angle azimuths."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    return [ChartPoint.cartesian(r * math.cos(i * golden), r * math.sin(i * golden)) for i, r in enumerate(np.linspace(0.0, r_max, n))]


def residual_grid(params: SolitonParams, points: Optional[Sequence[ChartPoint]] = None) -> list[SolitonResidual]:
    points = residual_grid_points() if points is None else points
    return [soliton_residual(params, p) for p in points]


@dataclass(frozen=True)
class RigidityProfile:
    A: float
    grid: np.ndarray
    h_values: np.ndarray
    hp_values: np.ndarray
    solution: Callable[[float], np.ndarray] = field(compare=False, repr=False)

    def h(self, r: float) -> float:
        return float(self.solution(r)[0])

    def hp(self, r: float) -> float:
        return 1.0 - self.A * self.h(r) ** 2

    def as_profile(self) -> Profile:
        """The solved ``h`` as a warping function (valid on the integrated range)."""
        return Profile("rigidity_h", self.h, self.hp, None, {"kind": "rigidity_ode", "A": self.A})


RIGIDITY_RTOL = 1e-12
RIGIDITY_ATOL = 1e-13


def _solve_rigidity(A: float, r_max: float, max_step: float, potential_slope: Optional[float] = None):
    if potential_slope is None:
        rhs = lambda r, y: [1.0 - A * y[0] * y[0]]  # noqa: E731
        y0 = [0.0]
    else:
        a = potential_slope
        rhs = lambda r, y: [1.0 - A * y[0] * y[0], a * y[0]]  # noqa: E731
        y0 = [0.0, 0.0]
    sol = solve_ivp(rhs, (0.0, r_max), y0, method="RK45", rtol=RIGIDITY_RTOL, atol=RIGIDITY_ATOL, max_step=max_step, dense_output=True)
    if not sol.success:
        raise StepSizeError(f"rigidity ODE integration failed: {sol.message}")
    return sol


def rigidity_ode_solve(A: float, r_max: float = 8.0, step: float = 0.05) -> RigidityProfile:
    """Integrate ``h' = 1 - A h^2``, ``h(0) = 0`` with an adaptive Dormand-Prince 5(4) pair.

    ``step`` is both the output grid spacing and the largest internal step.
    """
    if not A > 0.0:
        raise DomainError(f"A must be positive, got {A}")
    if not (r_max > 0.0 and step > 0.0):
        raise DomainError("r_max and step must be positive")
    sol = _solve_rigidity(A, r_max, step)
    grid = np.linspace(0.0, r_max, int(round(r_max / step)) + 1)
    h = sol.sol(grid)[0]
    return RigidityProfile(A, grid, h, 1.0 - A * h * h, sol.sol)


def rigidity_closed_form(A: float, r) -> np.ndarray:
    return np.tanh(math.sqrt(A) * np.asarray(r, dtype=float)) / math.sqrt(A)


def curvature_along_profile(profile: RigidityProfile, radii) -> np.ndarray:
    """``K = -h''/h`` with ``h''`` from differencing the solved ``h'``."""
    out = []
    for r in radii:
        hpp = fd.derivative_1d(profile.hp, float(r))
        out.append(-hpp / profile.h(float(r)))
    return np.array(out)


@dataclass(frozen=True)
class RigidityConsistency:
    A: float
    a: float
    rho: float
    k: float
    ode_defect: float  # max |(1 - 2 rho) h'' - a h h'|
    hessian_defect: float  # max || Hess f - (rho - 1/2) R g ||_F
    radii: np.ndarray

    def ok(self, tol: float = 1e-7) -> bool:
        return self.ode_defect < tol and self.hessian_defect < tol


def rigidity_consistency(
    A: float, a: float, rho: float, r_max: float = 5.0, n: int = 26, hessian_radii: Optional[Sequence[float]] = None
) -> RigidityConsistency:
    """Check ``(1 - 2 rho) h'' = a h h'`` along the solved profile and that the
    radial potential with ``f' = a h`` satisfies ``Hess f = (rho - 1/2) R g``."""
    SolitonParams(rho).require_nondegenerate()
    k = a / (1.0 - 2.0 * rho)
    if not math.isclose(A, -k / 2.0, rel_tol=1e-12, abs_tol=1e-15):
        raise ParameterInconsistencyError(f"A = {A} but -a / (2 (1 - 2 rho)) = {-k / 2.0}")
    prof = rigidity_ode_solve(A, r_max + 0.5, 0.05)
    radii = np.linspace(0.0, r_max, n)
    ode_defect = 0.0
    for r in radii:
        hpp = fd.derivative_1d(prof.hp, max(float(r), 0.0)) if r > 0 else -2.0 * A * prof.h(0.0) * prof.hp(0.0)
        ode_defect = max(ode_defect, abs((1.0 - 2.0 * rho) * hpp - a * prof.h(float(r)) * prof.hp(float(r))))

    sol = _solve_rigidity(A, r_max + 0.5, 0.05, potential_slope=a)
    h_prof = Profile("rigidity_h", lambda s: float(sol.sol(s)[0]), None, None, {"kind": "rigidity_ode", "A": A})
    g = metric_field(warped(h_prof))
    f = ScalarField(lambda q: float(sol.sol(q[0])[1]), ChartKind.GEODESIC_POLAR)
    hess_radii = np.linspace(0.25, r_max, 12) if hessian_radii is None else np.asarray(hessian_radii)
    hess_defect = 0.0
    for r in hess_radii:
        p = ChartPoint.geodesic_polar(float(r), 0.3)
        R = 2.0 * gauss_curvature(g, p)
        hess_defect = max(hess_defect, float(np.linalg.norm(hessian(g, f, p) - (rho - 0.5) * R * g(p))))
    return RigidityConsistency(A, a, rho, k, ode_defect, hess_defect, radii)

"""Numerical tensor calculus for 2D metrics.

All operations work in a single declared chart.  Fields carry their chart and
a coordinate-level evaluator ``func(q)`` taking ``q = [c1, c2]``; the
``ChartPoint`` API on top checks that points and fields agree on the chart.
Derivatives come from :mod:`cigarlab.finite_diff`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import faults
from . import finite_diff as fd
from .charts import SINGULARITY_FLOOR, ChartKind, ChartPoint
from .errors import ChartMismatchError, DomainError, EmptySampleError, SingularMetricError

DET_FLOOR = 1e-14


def _positive_axes(chart: ChartKind) -> tuple[int, ...]:
    return (0,) if chart.singular_at_tip else ()


def _coords(p: ChartPoint, chart: ChartKind) -> np.ndarray:
    if p.kind is not chart:
        raise ChartMismatchError(f"point is in the {p.kind.value} chart, field in {chart.value}")
    if chart.singular_at_tip and p.c1 < SINGULARITY_FLOOR:
        raise DomainError(f"{chart.value} chart is singular at c1={p.c1}; use the Cartesian chart")
    return p.coords


@dataclass(frozen=True)
class ScalarField:
    func: Callable[[np.ndarray], float]
    chart: ChartKind
    params: object = None

    def __call__(self, p: ChartPoint) -> float:
        return float(self.func(_coords(p, self.chart)))


@dataclass(frozen=True)
class SymTensorField:
    """A symmetric (0,2)-tensor field in one chart.

    ``regularize`` optionally maps a point to an equivalent (field, point) pair
    in a chart that is smooth there; scalar invariants use it near the tip.
    ``scale`` optionally gives, at coordinates ``q``, the size of the terms that
    cancel to produce the field's value; derived fields such as ``L_V g`` set it
    so that differencing them again is judged against that size.
    """

    func: Callable[[np.ndarray], np.ndarray]
    chart: ChartKind
    name: str = ""
    regularize: Optional[Callable[[ChartPoint], tuple["SymTensorField", ChartPoint]]] = field(
        default=None, compare=False, repr=False
    )
    scale: Optional[Callable[[np.ndarray], float]] = field(default=None, compare=False, repr=False)

    def __call__(self, p: ChartPoint) -> np.ndarray:
        return self.at(_coords(p, self.chart))

    def at(self, q: np.ndarray) -> np.ndarray:
        m = np.asarray(self.func(q), dtype=float)
        return 0.5 * (m + m.T)


@dataclass(frozen=True)
class ProportionalityReport:
    is_zero: bool
    is_proportional: bool
    factor_samples: list[tuple[ChartPoint, float]]
    relative_residual: float
    tolerance: float

    @property
    def factors(self) -> np.ndarray:
        return np.array([c for _, c in self.factor_samples])


def _metric_at(g: SymTensorField, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = g.at(q)
    det = np.linalg.det(m)
    if abs(det) < DET_FLOOR:
        raise SingularMetricError(f"det g = {det:.3e} at {q}")
    return m, np.linalg.inv(m)


def _christoffel_q(g: SymTensorField, q: np.ndarray, step: fd.StepControl) -> np.ndarray:
    m, inv = _metric_at(g, q)
    dg = fd.gradient(g.at, q, step, _positive_axes(g.chart))  # dg[k, i, j] = d_k g_ij
    first = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    gam = np.einsum("kl,lij->kij", inv, first)
    gam = 0.5 * (gam + gam.transpose(0, 2, 1))
    if faults.active("christoffel_sign"):
        gam = -gam
    return gam


def christoffel(g: SymTensorField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    """Christoffel symbols ``gamma[k, i, j]`` of the second kind at ``p``."""
    return _christoffel_q(g, _coords(p, g.chart), step)


def metric_compatibility_defect(g: SymTensorField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    """``(nabla_k g)_ij``, which must vanish for the Levi-Civita connection."""
    q = _coords(p, g.chart)
    m = g.at(q)
    dg = fd.gradient(g.at, q, step, _positive_axes(g.chart))
    gam = _christoffel_q(g, q, step)
    return dg - np.einsum("lki,lj->kij", gam, m) - np.einsum("lkj,il->kij", gam, m)


def _brioschi(q: np.ndarray, g: SymTensorField, step: fd.StepControl) -> float:
    m, _ = _metric_at(g, q)
    axes = _positive_axes(g.chart)
    d = fd.gradient(g.at, q, step, axes)
    dd = fd.hessian_matrix(g.at, q, step, axes)
    E, F, G = m[0, 0], m[0, 1], m[1, 1]
    E_u, E_v = d[0, 0, 0], d[1, 0, 0]
    F_u, F_v = d[0, 0, 1], d[1, 0, 1]
    G_u, G_v = d[0, 1, 1], d[1, 1, 1]
    E_vv, F_uv, G_uu = dd[1, 1, 0, 0], dd[0, 1, 0, 1], dd[0, 0, 1, 1]
    m1 = np.array(
        [
            [-0.5 * E_vv + F_uv - 0.5 * G_uu, 0.5 * E_u, F_u - 0.5 * E_v],
            [F_v - 0.5 * G_u, E, F],
            [0.5 * G_v, F, G],
        ]
    )
    m2 = np.array([[0.0, 0.5 * E_v, 0.5 * G_u], [0.5 * E_v, E, F], [0.5 * G_u, F, G]])
    return float((np.linalg.det(m1) - np.linalg.det(m2)) / (E * G - F * F) ** 2)


def gauss_curvature(g: SymTensorField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> float:
    """Gaussian curvature from the Brioschi formula with finite-difference derivatives.

    If the field knows a regular chart near ``p`` (``g.regularize``), the
    computation is delegated there; K is a scalar so no transformation is needed.
    """
    if g.regularize is not None:
        g, p = g.regularize(p)
    return _brioschi(_coords(p, g.chart), g, step)


def scalar_curvature(g: SymTensorField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> float:
    return 2.0 * gauss_curvature(g, p, step)


def conformal_gauss_curvature(log_u: ScalarField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> float:
    """K of ``u (dx^2 + dy^2)`` as ``-(1/2u) Laplacian(log u)``, Cartesian chart only.

    Independent of :func:`gauss_curvature`: only the scalar ``log u`` is differenced.
    """
    if log_u.chart is not ChartKind.CARTESIAN:
        raise ChartMismatchError("the conformal curvature formula needs the Cartesian chart")
    q = _coords(p, ChartKind.CARTESIAN)
    dd = fd.hessian_matrix(log_u.func, q, step)
    return float(-(dd[0, 0] + dd[1, 1]) / (2.0 * np.exp(log_u.func(q))))


def hessian(g: SymTensorField, f: ScalarField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    """Covariant Hessian ``d_i d_j f - Gamma^k_ij d_k f``."""
    if f.chart is not g.chart:
        raise ChartMismatchError("metric and scalar field live in different charts")
    q = _coords(p, g.chart)
    axes = _positive_axes(g.chart)
    df = fd.gradient(f.func, q, step, axes)
    ddf = fd.hessian_matrix(f.func, q, step, axes)
    gam = _christoffel_q(g, q, step)
    h = ddf - np.einsum("kij,k->ij", gam, df)
    return 0.5 * (h + h.T)


def ricci_by_contraction(g: SymTensorField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    """Ricci tensor contracted from the Riemann tensor (debug cross-check of Ric = K g).

    ``Ric_ij = d_k G^k_ij - d_j G^k_ik + G^k_km G^m_ij - G^k_jm G^m_ik``.
    """
    q = _coords(p, g.chart)
    gam = _christoffel_q(g, q, step)
    dgam = fd.gradient(lambda x: _christoffel_q(g, x, step), q, step, _positive_axes(g.chart))
    # dgam[a, k, i, j] = d_a Gamma^k_ij
    ric = (
        np.einsum("kkij->ij", dgam)
        - np.einsum("jkik->ij", dgam)
        + np.einsum("kkm,mij->ij", gam, gam)
        - np.einsum("kjm,mik->ij", gam, gam)
    )
    return 0.5 * (ric + ric.T)


def lie_derivative_q(T: SymTensorField, V, q: np.ndarray, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    """``(L_V T)_ij = V^k d_k T_ij + T_kj d_i V^k + T_ik d_j V^k`` at coordinates ``q``."""
    axes = _positive_axes(T.chart)
    vf = V.func
    v = np.asarray(vf(q), dtype=float)
    t = T.at(q)
    floor = T.scale(q) if T.scale is not None else 0.0
    dT = fd.gradient(T.at, q, step, axes, floor)  # dT[k, i, j]
    dV = fd.gradient(vf, q, step, axes)  # dV[i, k] = d_i V^k
    transport = np.einsum("ik,kj->ij", dV, t)
    if faults.active("lie_transport_sign"):
        transport = -transport
    out = np.einsum("k,kij->ij", v, dT) + transport + transport.T
    return 0.5 * (out + out.T)


def lie_derivative_field(T: SymTensorField, V, step: fd.StepControl = fd.DEFAULT_STEP) -> SymTensorField:
    """The tensor field ``q -> (L_V T)(q)``, evaluable anywhere ``T`` and ``V`` are."""
    if V.chart is not T.chart:
        raise ChartMismatchError(f"vector field in {V.chart.value}, tensor in {T.chart.value}")
    name = f"L_{getattr(V, 'name', 'V')} {T.name}".strip()
    axes = _positive_axes(T.chart)

    def scale(q: np.ndarray) -> float:
        # Size of the transport terms T dV, which cancel exactly for Killing fields.
        dV = fd.gradient(V.func, q, step, axes)
        return float(np.max(np.abs(T.at(q))) * max(1.0, np.max(np.abs(dV))))

    return SymTensorField(lambda q: lie_derivative_q(T, V, q, step), T.chart, name, scale=scale)


def lie_derivative(g: SymTensorField, V, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    return lie_derivative_field(g, V, step)(p)


def second_lie_derivative(g: SymTensorField, V, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP) -> np.ndarray:
    """``L_V L_V g`` at ``p``, obtained by differencing the first Lie derivative field."""
    first = lie_derivative_field(g, V, step)
    return lie_derivative_field(first, V, step)(p)


def proportionality(
    A: SymTensorField | Callable[[ChartPoint], np.ndarray],
    B: SymTensorField | Callable[[ChartPoint], np.ndarray],
    sample: Sequence[ChartPoint],
    tol: float = 1e-6,
    scale: Optional[float] = None,
) -> ProportionalityReport:
    """Test ``A = c(p) B`` pointwise over ``sample``.

    ``c(p)`` is the Frobenius least-squares factor.  The relative residual is the
    largest ``||A - c B||_F`` over the sample divided by the largest ``||A||_F``
    (floored at ``1e-10 * scale``).  ``A`` counts as zero when its largest norm
    is below ``tol * scale``; ``scale`` defaults to the largest entry of ``B``.
    """
    if len(sample) == 0:
        raise EmptySampleError("proportionality needs at least one sample point")
    a_vals = [np.asarray(A(p), dtype=float) for p in sample]
    b_vals = [np.asarray(B(p), dtype=float) for p in sample]
    return proportionality_values(a_vals, b_vals, sample, tol, scale)


def proportionality_values(a_vals, b_vals, sample: Sequence[ChartPoint], tol: float = 1e-6, scale: Optional[float] = None) -> ProportionalityReport:
    """:func:`proportionality` on tensors already evaluated at ``sample``."""
    if len(sample) == 0:
        raise EmptySampleError("proportionality needs at least one sample point")
    if scale is None:
        scale = max(float(np.max(np.abs(b))) for b in b_vals)
    scale = max(scale, 1e-300)
    a_norm = max(float(np.linalg.norm(a)) for a in a_vals)
    floor = 1e-10 * scale
    factors = []
    worst = 0.0
    for p, a, b in zip(sample, a_vals, b_vals):
        bb = float(np.sum(b * b))
        c = float(np.sum(a * b)) / bb if bb > 0.0 else 0.0
        factors.append((p, c))
        worst = max(worst, float(np.linalg.norm(a - c * b)))
    is_zero = a_norm < tol * scale
    rel = 0.0 if is_zero else worst / max(a_norm, floor)
    return ProportionalityReport(
        is_zero=is_zero,
        is_proportional=is_zero or rel <= tol,
        factor_samples=factors,
        relative_residual=rel,
        tolerance=tol,
    )

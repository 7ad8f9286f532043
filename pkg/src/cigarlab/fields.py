"""Named vector fields and the Killing / conformal / mixed-Killing classifier."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from . import finite_diff as fd
from .calculus import (
    ProportionalityReport,
    ScalarField,
    lie_derivative_field,
    proportionality_values,
)
from .charts import ChartKind, ChartPoint, SolitonParams, chart_jacobian, convert
from .errors import (
    ChartMismatchError,
    ConstraintError,
    DegenerateSampleError,
    FactorUndefinedError,
    UnknownFieldError,
)
from .metrics import MetricSpec, metric_field
from .profiles import Profile, profile_from_json

DEFAULT_TOL = 1e-6
DEFAULT_SEED = 20251016
DEFAULT_ANNULUS = (0.2, 3.0)
DEFAULT_SAMPLE_SIZE = 24


@dataclass(frozen=True)
class VectorFieldSpec:
    """A tangent vector field given by its components in one chart."""

    name: str
    chart: ChartKind
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, p: ChartPoint) -> np.ndarray:
        if p.kind is not self.chart:
            raise ChartMismatchError(f"field {self.name} lives in {self.chart.value}, point in {p.kind.value}")
        return np.asarray(self.func(p.coords), dtype=float)

    def to_json(self) -> dict:
        doc = {"name": self.name}
        for k, v in self.params.items():
            doc[k] = v.to_json() if isinstance(v, Profile) else v
        return doc


def _params_of(kw) -> SolitonParams:
    if "E" in kw and "t" not in kw:
        return SolitonParams.testing_with_raw_E(float(kw["E"]), float(kw.get("rho", 0.0)))
    return SolitonParams(float(kw.get("rho", 0.0)), float(kw.get("t", 0.0)))


def _as_profile(v) -> Profile:
    return v if isinstance(v, Profile) else profile_from_json(v)


def _radial_w(A: float, B: float, sign: float, domain: tuple[float, float]):
    lo, hi = domain
    # A psi^2 + B is monotone in s >= 0, so the endpoints bound it
    worst = min(A * math.tanh(lo) ** 2 + B, A * math.tanh(hi) ** 2 + B)
    if worst < 0.0:
        raise ConstraintError(f"A psi^2 + B = {worst:.3g} < 0 on s in [{lo}, {hi}] for A={A}, B={B}")

    def w(s):
        return sign * math.sqrt(max(A * math.tanh(s) ** 2 + B, 0.0))

    return w


def catalog(name: str, **kw) -> VectorFieldSpec:
    """Build a named field.

    Names: ``dx``, ``dy``, ``rotation``, ``dilation`` (Cartesian); ``xi`` (rho, t);
    ``fifth_basis`` (E or rho/t); ``radial_mk`` (A, B), ``mixed_mk`` (A, B, C),
    ``radial_test`` (w) in the geodesic polar chart; ``angular_test`` (v) in the
    polar chart; ``product_test`` (v) on the product chart.  Radial families take
    ``sign`` (+1/-1) and ``domain`` = (s_lo, s_hi) for the constraint check.
    """
    cart, polar, geo = ChartKind.CARTESIAN, ChartKind.POLAR, ChartKind.GEODESIC_POLAR
    if name == "dx":
        return VectorFieldSpec(name, cart, lambda q: np.array([1.0, 0.0]))
    if name == "dy":
        return VectorFieldSpec(name, cart, lambda q: np.array([0.0, 1.0]))
    if name == "rotation":
        return VectorFieldSpec(name, cart, lambda q: np.array([-q[1], q[0]]))
    if name == "dilation":
        return VectorFieldSpec(name, cart, lambda q: np.array([q[0], q[1]]))
    if name == "xi":
        params = _params_of(kw)
        c = params.field_coefficient
        return VectorFieldSpec(name, cart, lambda q: c * np.array([q[0], q[1]]), {"rho": params.rho, "t": params.t, "E": params.E})
    if name == "fifth_basis":
        E = _params_of(kw).E
        return VectorFieldSpec(
            name, cart, lambda q: math.sqrt(1.0 + E / (q[0] * q[0] + q[1] * q[1])) * np.array([q[0], q[1]]), {"E": E}
        )
    if name in ("radial_mk", "mixed_mk"):
        A, B = float(kw.get("A", 1.0)), float(kw.get("B", 0.0))
        C = float(kw.get("C", 0.0)) if name == "mixed_mk" else 0.0
        sign = -1.0 if float(kw.get("sign", 1.0)) < 0 else 1.0
        domain = tuple(kw.get("domain", DEFAULT_ANNULUS))
        w = _radial_w(A, B, sign, domain)
        params = {"A": A, "B": B, "sign": sign}
        if name == "mixed_mk":
            params["C"] = C
        return VectorFieldSpec(name, geo, lambda q: np.array([w(q[0]), C]), params)
    if name == "radial_test":
        w = _as_profile(kw.get("w", "tanh"))
        return VectorFieldSpec(name, geo, lambda q: np.array([float(w(q[0])), 0.0]), {"w": w})
    if name == "angular_test":
        v = _as_profile(kw.get("v", {"kind": "poly", "coeffs": [1.0]}))
        return VectorFieldSpec(name, polar, lambda q: np.array([0.0, float(v(q[0]))]), {"v": v})
    if name == "product_test":
        v = _as_profile(kw.get("v", "exp"))
        return VectorFieldSpec(name, cart, lambda q: np.array([float(v(q[0])), 0.0]), {"v": v})
    raise UnknownFieldError(f"unknown field {name!r}")


def field_from_json(doc: dict) -> VectorFieldSpec:
    """``{"name": "mixed_mk", "A": 1.0, "B": 1.0, "C": 0.0}`` and analogues."""
    doc = dict(doc)
    return catalog(doc.pop("name"), **doc)


CONFORMAL_BASIS = ("dx", "dy", "rotation", "dilation")


def conformal_basis() -> list[VectorFieldSpec]:
    return [catalog(n) for n in CONFORMAL_BASIS]


def pushforward(V: VectorFieldSpec, target: ChartKind, params: Optional[SolitonParams] = None) -> VectorFieldSpec:
    """Re-express ``V`` in the ``target`` chart through the analytic chart Jacobian."""
    target = ChartKind(target)
    if V.chart is target:
        return V
    params = params if params is not None else SolitonParams()

    def func(q):
        pt = ChartPoint(target, q[0], q[1])
        ps = convert(pt, V.chart, params)
        return chart_jacobian(ps, target, params) @ np.asarray(V.func(ps.coords), dtype=float)

    return VectorFieldSpec(V.name, target, func, V.params)


def default_sample(
    chart: ChartKind = ChartKind.GEODESIC_POLAR,
    params: Optional[SolitonParams] = None,
    n: int = DEFAULT_SAMPLE_SIZE,
    seed: int = DEFAULT_SEED,
    annulus: tuple[float, float] = DEFAULT_ANNULUS,
) -> list[ChartPoint]:
    """Quasi-random (scrambled Halton) points with ``annulus[0] <= s <= annulus[1]``."""
    params = params if params is not None else SolitonParams()
    u = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    lo, hi = annulus
    pts = [ChartPoint.geodesic_polar(lo + (hi - lo) * a, 2.0 * math.pi * b) for a, b in u]
    return [convert(p, chart, params) for p in pts]


def sample_in_chart(sample: Sequence[ChartPoint], chart: ChartKind, params: SolitonParams) -> list[ChartPoint]:
    return [convert(p, chart, params) for p in sample]


class ClassKind(str, enum.Enum):
    KILLING = "killing"
    CONFORMAL = "conformal"
    MIXED_KILLING = "mixed_killing"
    NONE = "none"


@dataclass(frozen=True)
class FieldClass:
    """Classifier verdict.

    ``kind`` is the strongest class found.  ``lambda_samples`` (conformal
    factor, ``L_V g = 2 lambda g``) are filled for Killing and conformal fields,
    ``f_samples`` (mixed Killing factor) whenever ``L_V L_V g`` is proportional
    to ``L_V g`` and ``L_V g`` is not zero, conformal fields included.
    """

    kind: ClassKind
    vs_metric: ProportionalityReport
    vs_first: Optional[ProportionalityReport]
    lambda_samples: list[tuple[ChartPoint, float]] = field(default_factory=list)
    f_samples: list[tuple[ChartPoint, float]] = field(default_factory=list)

    @property
    def is_killing(self) -> bool:
        return self.kind is ClassKind.KILLING

    @property
    def is_conformal(self) -> bool:
        return self.kind in (ClassKind.KILLING, ClassKind.CONFORMAL)

    @property
    def is_mixed_killing(self) -> bool:
        return self.kind is not ClassKind.NONE

    def to_json(self) -> dict:
        doc = {
            "class": self.kind.value,
            "residual_vs_metric": self.vs_metric.relative_residual,
            "residual_vs_first": None if self.vs_first is None else self.vs_first.relative_residual,
        }
        if self.lambda_samples:
            doc["lambda_samples"] = [[p.kind.value, p.c1, p.c2, c] for p, c in self.lambda_samples]
        if self.f_samples:
            doc["f_samples"] = [[p.kind.value, p.c1, p.c2, c] for p, c in self.f_samples]
        return doc


def _jittered(p: ChartPoint, delta: float) -> ChartPoint:
    return ChartPoint(p.kind, p.c1 + delta, p.c2 + delta)


def classify(
    V: VectorFieldSpec,
    g: MetricSpec,
    sample: Optional[Sequence[ChartPoint]] = None,
    tol: float = DEFAULT_TOL,
    step: fd.StepControl = fd.DEFAULT_STEP,
) -> FieldClass:
    """Decide whether ``V`` is Killing, conformal or mixed Killing for ``g``.

    ``V`` is pushed forward to the metric's chart when they differ; sample points
    are converted likewise.  Raises :class:`DegenerateSampleError` when ``L_V g``
    vanishes on the whole sample but not at nearby points.
    """
    params = g.params
    V = pushforward(V, g.chart, params)
    if sample is None:
        sample = default_sample(g.chart, params)
    sample = sample_in_chart(sample, g.chart, params)
    gf = metric_field(g)
    first = lie_derivative_field(gf, V, step)
    g_vals = [gf(p) for p in sample]
    l_vals = [first(p) for p in sample]
    scale = max(float(np.max(np.abs(m))) for m in g_vals)
    vs_metric = proportionality_values(l_vals, g_vals, sample, tol, scale)

    if vs_metric.is_zero:
        probe = [_jittered(p, 0.05) for p in sample[:4]]
        probe_norm = max(float(np.linalg.norm(first(p))) for p in probe)
        if probe_norm > 1e3 * tol * scale:
            raise DegenerateSampleError(
                f"L_V g vanishes on the sample but reaches {probe_norm:.3e} at nearby points"
            )
        return FieldClass(
            ClassKind.KILLING, vs_metric, None, lambda_samples=[(p, 0.0) for p in sample]
        )

    second = lie_derivative_field(first, V, step)
    ll_vals = [second(p) for p in sample]
    vs_first = proportionality_values(ll_vals, l_vals, sample, tol)
    f_samples = vs_first.factor_samples if vs_first.is_proportional else []
    if vs_metric.is_proportional:
        lam = [(p, 0.5 * c) for p, c in vs_metric.factor_samples]
        return FieldClass(ClassKind.CONFORMAL, vs_metric, vs_first, lambda_samples=lam, f_samples=f_samples)
    if vs_first.is_proportional:
        return FieldClass(ClassKind.MIXED_KILLING, vs_metric, vs_first, f_samples=f_samples)
    return FieldClass(ClassKind.NONE, vs_metric, vs_first)


def mixed_factor_xi(params: SolitonParams, p: ChartPoint) -> float:
    """Closed-form mixed Killing factor of the potential field,
    ``-4 (1 - 2 rho) (E - r^2) / (E + r^2)``."""
    params.require_nondegenerate()
    r2 = convert(p, ChartKind.CARTESIAN, params)
    r2 = r2.c1 * r2.c1 + r2.c2 * r2.c2
    E = params.E
    return -4.0 * (1.0 - 2.0 * params.rho) * (E - r2) / (E + r2)


def conformal_factor_formula(
    V: VectorFieldSpec, lam: ScalarField, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP
) -> float:
    """Mixed Killing factor ``V(lambda)/lambda + 2 lambda`` of a conformal field."""
    if V.chart is not lam.chart or p.kind is not V.chart:
        raise ChartMismatchError("field, conformal factor and point must share a chart")
    q = p.coords
    val = float(lam.func(q))
    if val == 0.0:
        raise FactorUndefinedError(f"conformal factor vanishes at {p}")
    grad = fd.gradient(lam.func, q, step, (0,) if p.kind.singular_at_tip else ())
    v_lam = float(np.dot(V.func(q), grad))
    return v_lam / val + 2.0 * val


def lambda_from_flat(
    V: VectorFieldSpec, log_phi: ScalarField, lambda_flat: float, p: ChartPoint, step: fd.StepControl = fd.DEFAULT_STEP
) -> float:
    """Conformal factor for ``phi * delta`` from the flat one: ``lambda_flat + V(log phi) / 2``."""
    if V.chart is not log_phi.chart:
        raise ChartMismatchError("field and conformal factor must share a chart")
    q = p.coords
    grad = fd.gradient(log_phi.func, q, step)
    return lambda_flat + 0.5 * float(np.dot(V.func(q), grad))


def product_mixed_factor(v: Profile, x: float) -> float:
    """Mixed Killing factor ``v v''/v' + 2 v'`` of ``v(x) d/dx`` on a product."""
    d1 = float(v.d1(x))
    if d1 == 0.0:
        raise FactorUndefinedError(f"v'({x}) = 0: the field is Killing there and the factor is undefined")
    return float(v(x)) * float(v.d2(x)) / d1 + 2.0 * d1


def _stack(fields: Sequence[VectorFieldSpec], sample: Sequence[ChartPoint], params: SolitonParams) -> np.ndarray:
    cart = sample_in_chart(sample, ChartKind.CARTESIAN, params)
    rows = []
    for V in fields:
        W = pushforward(V, ChartKind.CARTESIAN, params)
        rows.append(np.concatenate([W(p) for p in cart]))
    return np.array(rows)


def span_singular_values(fields, sample, params: Optional[SolitonParams] = None) -> np.ndarray:
    params = params if params is not None else SolitonParams()
    return np.linalg.svd(_stack(fields, sample, params), compute_uv=False)


def rank_of_span(
    fields: Sequence[VectorFieldSpec],
    sample: Sequence[ChartPoint],
    tol: float = 1e-10,
    params: Optional[SolitonParams] = None,
    resample_seeds: Sequence[int] = (),
) -> int:
    """Numerical rank of the fields' component vectors stacked over ``sample``.

    With ``resample_seeds`` the rank is recomputed on fresh default samples and
    a warning is issued if it changes.
    """
    if 2 * len(sample) < len(fields):
        raise ValueError(f"need at least {math.ceil(len(fields) / 2)} sample points for {len(fields)} fields")
    sv = span_singular_values(fields, sample, params)
    rank = int(np.sum(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0
    for seed in resample_seeds:
        alt = default_sample(ChartKind.CARTESIAN, params, n=len(sample), seed=seed)
        sv2 = span_singular_values(fields, alt, params)
        rank2 = int(np.sum(sv2 > tol * sv2[0])) if sv2.size and sv2[0] > 0 else 0
        if rank2 != rank:
            warnings.warn(f"rank unstable under resampling: {rank} vs {rank2} (seed {seed})", RuntimeWarning)
    return rank

"""Coordinate charts on the plane and the exact transforms between them.

Three charts are supported: Cartesian ``(x, y)``, polar ``(r, theta)`` and
geodesic polar ``(s, theta)``, the last one tied to a soliton through
``r = sqrt(E) * sinh(s)``.  Angles are kept unwrapped; use
:func:`wrap_angle` for display.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRhoError, DomainError

#: Polar/geodesic-polar points closer to the tip than this are rejected by
#: tensor operations; use the Cartesian chart there.
SINGULARITY_FLOOR = 1e-8


class ChartKind(str, enum.Enum):
    CARTESIAN = "cartesian"
    POLAR = "polar"
    GEODESIC_POLAR = "geodesic_polar"

    @property
    def singular_at_tip(self) -> bool:
        return self is not ChartKind.CARTESIAN


@dataclass(frozen=True)
class ChartPoint:
    """A point tagged with the chart its coordinates refer to.

    ``c1`` is x, r or s; ``c2`` is y or theta.
    """

    kind: ChartKind
    c1: float
    c2: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ChartKind(self.kind))
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise DomainError(f"non-finite coordinates ({self.c1}, {self.c2})")
        if self.kind.singular_at_tip and self.c1 <= 0.0:
            raise DomainError(f"{self.kind.value} chart requires c1 > 0, got {self.c1}")

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=float)

    @classmethod
    def cartesian(cls, x: float, y: float) -> "ChartPoint":
        return cls(ChartKind.CARTESIAN, float(x), float(y))

    @classmethod
    def polar(cls, r: float, theta: float) -> "ChartPoint":
        return cls(ChartKind.POLAR, float(r), float(theta))

    @classmethod
    def geodesic_polar(cls, s: float, theta: float) -> "ChartPoint":
        return cls(ChartKind.GEODESIC_POLAR, float(s), float(theta))


def wrap_angle(theta: float) -> float:
    """Reduce an unwrapped angle to ``[0, 2*pi)``."""
    return theta % (2.0 * math.pi)


@dataclass(frozen=True)
class SolitonParams:
    """Soliton constants ``rho`` and ``t``; ``E = exp(4 (1 - 2 rho) t)`` is derived."""

    rho: float = 0.0
    t: float = 0.0
    _E_override: float | None = field(default=None, repr=False, compare=True)

    def __post_init__(self):
        if self._E_override is not None and not self._E_override > 0.0:
            raise DomainError(f"E must be positive, got {self._E_override}")

    @property
    def E(self) -> float:
        if self._E_override is not None:
            return self._E_override
        return math.exp(4.0 * (1.0 - 2.0 * self.rho) * self.t)

    @property
    def sqrt_E(self) -> float:
        return math.sqrt(self.E)

    @property
    def field_coefficient(self) -> float:
        """Coefficient ``-2 (1 - 2 rho)`` of the Euler field in the potential field."""
        return -2.0 * (1.0 - 2.0 * self.rho)

    @property
    def degenerate(self) -> bool:
        return self.rho == 0.5

    def require_nondegenerate(self) -> None:
        if self.degenerate:
            raise DegenerateRhoError("rho = 1/2: the potential field vanishes identically")

    @classmethod
    def testing_with_raw_E(cls, E: float, rho: float = 0.0) -> "SolitonParams":
        """Testing-only constructor that fixes ``E`` directly instead of deriving it from ``t``."""
        return cls(rho=rho, t=0.0, _E_override=float(E))


def _require_kind(p: ChartPoint, kind: ChartKind) -> None:
    if p.kind is not kind:
        raise DomainError(f"expected a {kind.value} point, got {p.kind.value}")


def to_geodesic_polar(p: ChartPoint, params: SolitonParams) -> ChartPoint:
    """Polar ``(r, theta)`` to geodesic polar ``(s, theta)`` via ``r = sqrt(E) sinh s``."""
    _require_kind(p, ChartKind.POLAR)
    return ChartPoint.geodesic_polar(math.asinh(p.c1 / params.sqrt_E), p.c2)


def from_geodesic_polar(p: ChartPoint, params: SolitonParams) -> ChartPoint:
    _require_kind(p, ChartKind.GEODESIC_POLAR)
    return ChartPoint.polar(params.sqrt_E * math.sinh(p.c1), p.c2)


def cartesian_polar(p: ChartPoint) -> ChartPoint:
    """Cartesian <-> polar; the direction is inferred from ``p.kind``."""
    if p.kind is ChartKind.POLAR:
        return ChartPoint.cartesian(p.c1 * math.cos(p.c2), p.c1 * math.sin(p.c2))
    if p.kind is ChartKind.CARTESIAN:
        if p.c1 == 0.0 and p.c2 == 0.0:
            raise DomainError("the origin has no polar coordinates")
        return ChartPoint.polar(math.hypot(p.c1, p.c2), math.atan2(p.c2, p.c1))
    raise DomainError("cartesian_polar needs a Cartesian or polar point")


def convert(p: ChartPoint, target: ChartKind, params: SolitonParams | None = None) -> ChartPoint:
    """Route ``p`` to ``target`` through the polar chart when needed."""
    target = ChartKind(target)
    if p.kind is target:
        return p
    params = params if params is not None else SolitonParams()
    if p.kind is ChartKind.GEODESIC_POLAR:
        p = from_geodesic_polar(p, params)
    elif p.kind is ChartKind.CARTESIAN:
        p = cartesian_polar(p)
    # p is polar now
    if target is ChartKind.POLAR:
        return p
    if target is ChartKind.CARTESIAN:
        return cartesian_polar(p)
    return to_geodesic_polar(p, params)


def _jac_to_polar(p: ChartPoint, params: SolitonParams) -> np.ndarray:
    """d(r, theta)/d(source) at ``p``."""
    if p.kind is ChartKind.POLAR:
        return np.eye(2)
    if p.kind is ChartKind.CARTESIAN:
        x, y = p.c1, p.c2
        r2 = x * x + y * y
        if r2 == 0.0:
            raise DomainError("polar Jacobian is singular at the origin")
        r = math.sqrt(r2)
        return np.array([[x / r, y / r], [-y / r2, x / r2]])
    s = p.c1
    return np.array([[params.sqrt_E * math.cosh(s), 0.0], [0.0, 1.0]])


def _jac_from_polar(q: ChartPoint, target: ChartKind, params: SolitonParams) -> np.ndarray:
    """d(target)/d(r, theta) at the polar point ``q``."""
    if target is ChartKind.POLAR:
        return np.eye(2)
    r, th = q.c1, q.c2
    if target is ChartKind.CARTESIAN:
        c, s_ = math.cos(th), math.sin(th)
        return np.array([[c, -r * s_], [s_, r * c]])
    s = math.asinh(r / params.sqrt_E)
    return np.array([[1.0 / (params.sqrt_E * math.cosh(s)), 0.0], [0.0, 1.0]])


def chart_jacobian(p: ChartPoint, target: ChartKind, params: SolitonParams | None = None) -> np.ndarray:
    """Analytic Jacobian ``d(target coords)/d(source coords)`` at ``p``.

    Raises
    ------
    DomainError
        At chart singularities (the origin / tip for the polar charts).
    """
    target = ChartKind(target)
    params = params if params is not None else SolitonParams()
    if p.kind is target:
        return np.eye(2)
    if p.kind.singular_at_tip and p.c1 < SINGULARITY_FLOOR:
        raise DomainError(f"{p.kind.value} chart is singular at c1={p.c1}")
    q = convert(p, ChartKind.POLAR, params)
    if target.singular_at_tip and q.c1 < SINGULARITY_FLOOR:
        raise DomainError(f"{target.value} chart is singular at r={q.c1}")
    return _jac_from_polar(q, target, params) @ _jac_to_polar(p, params)

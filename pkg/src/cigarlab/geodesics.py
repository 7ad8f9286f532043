"""Geodesics of the cigar in geodesic polar coordinates ``ds^2 + tanh(s)^2 dtheta^2``.

Integration uses the Dormand-Prince 5(4) pair with dense output; the angular
momentum ``ell = tanh(s)^2 theta'`` and the speed ``k = s'^2 + tanh(s)^2 theta'^2``
are recorded at every accepted step and serve as the accuracy monitor.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from . import faults
from .errors import DomainError, TipProximityError

S_FLOOR = 1e-6


@dataclass(frozen=True)
class GeodesicState:
    sigma: float
    s: float
    theta: float
    s_dot: float
    theta_dot: float

    @property
    def y(self) -> np.ndarray:
        return np.array([self.s, self.theta, self.s_dot, self.theta_dot])


@dataclass(frozen=True)
class ConservedPair:
    ell: float
    k: float

    @property
    def admissible(self) -> bool:
        """Real motion off the axis needs ``k > ell^2`` (and ``k > 0``)."""
        return self.k > 0.0 and (self.ell == 0.0 or self.k > self.ell * self.ell)


def conserved(state: GeodesicState) -> ConservedPair:
    t2 = math.tanh(state.s) ** 2
    return ConservedPair(t2 * state.theta_dot, state.s_dot**2 + t2 * state.theta_dot**2)


def state_from_conserved(pair: ConservedPair, s: float, inbound: bool = False, sigma: float = 0.0, theta: float = 0.0) -> GeodesicState:
    """The state at radius ``s`` with the given ``(ell, k)``; ``s' >= 0`` unless ``inbound``."""
    t2 = math.tanh(s) ** 2
    sd2 = pair.k - pair.ell**2 / t2
    if sd2 < -1e-14 * max(pair.k, 1.0):
        raise DomainError(f"s = {s} is inside the turning radius for ell={pair.ell}, k={pair.k}")
    sd = math.sqrt(max(sd2, 0.0))
    return GeodesicState(sigma, s, theta, -sd if inbound else sd, pair.ell / t2)


class Kind(str, enum.Enum):
    RADIAL = "radial"
    NON_RADIAL = "non_radial"


def geodesic_rhs(state: GeodesicState, s_floor: float = S_FLOOR) -> tuple[float, float, float, float]:
    """``(s', theta', s'', theta'')`` from ``s'' = psi psi' theta'^2`` and
    ``theta'' = -2 (psi'/psi) s' theta'`` with ``psi = tanh``."""
    return tuple(_rhs(state.y, s_floor))


def _rhs(y, s_floor=S_FLOOR):
    s, _, sd, td = y
    if s < s_floor and td != 0.0:
        raise TipProximityError(f"non-radial geodesic reached s = {s:.3e} < {s_floor:.1e}")
    psi = math.tanh(s)
    dpsi = 1.0 - psi * psi
    sdd = psi * dpsi * td * td
    if faults.active("geodesic_force_sign"):
        sdd = -sdd
    tdd = -2.0 * (dpsi / psi) * sd * td if td != 0.0 else 0.0
    return np.array([sd, td, sdd, tdd])


@dataclass(frozen=True)
class StepOptions:
    """Integrator tolerances, drift budget (per ``drift_span`` affine units), tip floor and ``E`` for ``r``."""

    rtol: float = 1e-10
    atol: float = 1e-10
    drift_budget: float = 1e-8
    drift_span: float = 20.0
    s_floor: float = S_FLOOR
    E: float = 1.0
    max_step: float = np.inf


@dataclass(frozen=True)
class TurningPoint:
    sigma: float
    s_min: float
    r_min: float


@dataclass
class GeodesicTrace:
    states: list[GeodesicState]
    conserved: list[ConservedPair]
    kind: Kind
    turning_point: Optional[TurningPoint]
    E: float
    drift_ell: float
    drift_k: float
    drift_budget: float
    tip_sigma: Optional[float] = None
    sign_changes: int = 0
    _segments: list = field(default_factory=list, repr=False)
    _anchor: int = 0

    @property
    def failed(self) -> bool:
        return not (self.drift_ell <= self.drift_budget and self.drift_k <= self.drift_budget)

    @property
    def reference(self) -> ConservedPair:
        return self.conserved[self._anchor]

    @property
    def winding(self) -> float:
        return self.states[-1].theta - self.states[0].theta

    @property
    def sigma_range(self) -> tuple[float, float]:
        return self.states[0].sigma, self.states[-1].sigma

    def at(self, sigma: float) -> np.ndarray:
        """Dense-output state vector ``[s, theta, s', theta']`` at ``sigma``."""
        for lo, hi, sol in self._segments:
            if lo - 1e-12 <= sigma <= hi + 1e-12:
                return sol(sigma)
        raise DomainError(f"sigma = {sigma} outside the trace {self.sigma_range}")

    def r_values(self) -> np.ndarray:
        return math.sqrt(self.E) * np.sinh(np.array([st.s for st in self.states]))

    def summary(self) -> dict:
        tp = self.turning_point
        return {
            "kind": self.kind.value,
            "ell": self.reference.ell,
            "k": self.reference.k,
            "E": self.E,
            "sigma_range": list(self.sigma_range),
            "n_states": len(self.states),
            "drift_ell": self.drift_ell,
            "drift_k": self.drift_k,
            "drift_budget": self.drift_budget,
            "failed": self.failed,
            "winding": self.winding,
            "tip_sigma": self.tip_sigma,
            "turning_point": None if tp is None else {"sigma": tp.sigma, "s_min": tp.s_min, "r_min": tp.r_min},
        }


def _run(y0, s0, s1, opts: StepOptions):
    def tip(sig, y):
        return y[0] - opts.s_floor

    tip.terminal = True
    sol = solve_ivp(
        lambda sig, y: _rhs(y, opts.s_floor),
        (s0, s1),
        y0,
        method="RK45",
        rtol=opts.rtol,
        atol=opts.atol,
        max_step=opts.max_step,
        dense_output=True,
        events=tip,
    )
    if sol.status == -1:
        raise DomainError(f"geodesic integration failed: {sol.message}")
    tip_sigma = float(sol.t_events[0][0]) if sol.t_events[0].size else None
    return sol, tip_sigma


def integrate(initial: GeodesicState, sigma_span: tuple[float, float], options: StepOptions = StepOptions()) -> GeodesicTrace:
    """Integrate from ``initial`` (at ``initial.sigma``) out to both ends of ``sigma_span``.

    Radial inbound traces stop at ``s_floor`` with a tip event.  The trace is
    marked failed (not raised) when the conserved quantities drift beyond the budget.
    """
    lo, hi = sorted(map(float, sigma_span))
    if not lo <= initial.sigma <= hi:
        raise DomainError(f"initial sigma {initial.sigma} outside span [{lo}, {hi}]")
    if initial.s <= options.s_floor:
        raise DomainError(f"initial s = {initial.s} at or below the tip floor")
    pair0 = conserved(initial)
    if not pair0.k > 0.0:
        raise DomainError("stationary initial state (k = 0)")

    y0 = initial.y
    segments = []
    states: list[GeodesicState] = []
    tip_sigma = None
    if initial.sigma > lo:
        sol, tip_b = _run(y0, initial.sigma, lo, options)
        states += [GeodesicState(float(t), *map(float, y)) for t, y in zip(sol.t[::-1], sol.y.T[::-1])][:-1]
        segments.append((float(sol.t[-1]), initial.sigma, sol.sol))
        tip_sigma = tip_b
    anchor = len(states)
    states.append(initial)
    if hi > initial.sigma:
        sol, tip_f = _run(y0, initial.sigma, hi, options)
        states += [GeodesicState(float(t), *map(float, y)) for t, y in zip(sol.t[1:], sol.y.T[1:])]
        segments.append((initial.sigma, float(sol.t[-1]), sol.sol))
        tip_sigma = tip_f if tip_f is not None else tip_sigma

    pairs = [conserved(st) for st in states]
    drift_ell = max(abs(p.ell - pair0.ell) for p in pairs)
    drift_k = max(abs(p.k - pair0.k) for p in pairs)
    length = states[-1].sigma - states[0].sigma
    budget = options.drift_budget * max(1.0, length / options.drift_span)
    kind = Kind.RADIAL if abs(pair0.ell) < 1e-14 else Kind.NON_RADIAL

    trace = GeodesicTrace(
        states=states,
        conserved=pairs,
        kind=kind,
        turning_point=None,
        E=options.E,
        drift_ell=drift_ell,
        drift_k=drift_k,
        drift_budget=budget,
        tip_sigma=tip_sigma,
        _segments=segments,
        _anchor=anchor,
    )
    if kind is Kind.NON_RADIAL:
        trace.turning_point, trace.sign_changes = _locate_turning_point(trace)
    return trace


def _locate_turning_point(trace: GeodesicTrace) -> tuple[Optional[TurningPoint], int]:
    """Bracket ``s' = 0`` between accepted steps and bisect on the dense output to 1e-12."""
    sd = np.array([st.s_dot for st in trace.states])
    sig = np.array([st.sigma for st in trace.states])
    roots = []
    for i in range(len(sd) - 1):
        if sd[i] == 0.0:
            roots.append(sig[i])
        elif sd[i] < 0.0 < sd[i + 1] or sd[i] > 0.0 > sd[i + 1]:
            roots.append(bisect(lambda x: trace.at(x)[2], sig[i], sig[i + 1], xtol=1e-12))
    if sd[-1] == 0.0:
        roots.append(sig[-1])
    if not roots:
        return None, 0
    star = roots[0]
    s_min = float(trace.at(star)[0])
    return TurningPoint(float(star), s_min, math.sqrt(trace.E) * math.sinh(s_min)), len(roots)


def closed_form_s(pair: ConservedPair, sigma) -> np.ndarray:
    """``cosh s = sqrt(k/(k - ell^2)) cosh(sqrt(k - ell^2) sigma)``, sigma from the turning point."""
    k, l2 = pair.k, pair.ell * pair.ell
    if not k > l2:
        raise DomainError(f"closed form needs k > ell^2 (k={k}, ell^2={l2})")
    w = math.sqrt(k - l2)
    return np.arccosh(math.sqrt(k / (k - l2)) * np.cosh(w * np.asarray(sigma, dtype=float)))


def turning_point(pair: ConservedPair, E: float) -> tuple[float, float]:
    """``(s_min, r_min)`` with ``sinh^2 s_min = ell^2/(k - ell^2)`` (from ``coth^2 s_min = k/ell^2``)."""
    k, l2 = pair.k, pair.ell * pair.ell
    if not k > l2:
        raise DomainError(f"turning point needs k > ell^2 (k={k}, ell^2={l2})")
    if not E > 0.0:
        raise DomainError("E must be positive")
    s_min = math.asinh(abs(pair.ell) / math.sqrt(k - l2))
    return s_min, math.sqrt(E) * math.sinh(s_min)


def printed_r_min(pair: ConservedPair, E: float) -> float:
    """``sqrt(E (k - ell^2) / ell^2)``: the alternative closed form, kept for comparison only."""
    return math.sqrt(E * (pair.k - pair.ell**2) / pair.ell**2)


def radial_equation_check(trace: GeodesicTrace) -> float:
    """``max |s'^2 - (k - ell^2 coth^2 s)|`` over the trace, with ``(ell, k)`` from the initial state."""
    ref = trace.reference
    return max(abs(st.s_dot**2 - (ref.k - ref.ell**2 / math.tanh(st.s) ** 2)) for st in trace.states)


def corrupt(trace: GeodesicTrace, index: int, ds_dot: float) -> GeodesicTrace:
    """Copy of ``trace`` with ``s'`` of one state shifted (fault-detection tests)."""
    states = list(trace.states)
    states[index] = replace(states[index], s_dot=states[index].s_dot + ds_dot)
    return GeodesicTrace(**{**trace.__dict__, "states": states})


def equation_residual(trace: GeodesicTrace, h: float = 1e-3) -> float:
    """Largest defect of both geodesic equations at the accepted steps.

    ``s''`` and ``theta''`` come from differencing the dense-output velocities
    with a 4th-order central stencil at ``h`` and ``h/2``, combined by Richardson
    extrapolation.  ``h`` is divided by the local rate ``max(1, |s'|, |theta'|)``
    so tight turns near the tip are resolved.
    """
    lo, hi = trace.sigma_range
    worst = 0.0

    def stencil(sigma: float, step: float) -> np.ndarray:
        w = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * step)
        ys = np.array([trace.at(sigma + o * step) for o in (-2, -1, 1, 2)])
        return w @ ys[:, 2:4]

    for st in trace.states:
        step = h / max(1.0, abs(st.s_dot), abs(st.theta_dot))
        if st.sigma - 2 * step < lo or st.sigma + 2 * step > hi:
            continue
        if trace.tip_sigma is not None and abs(st.sigma - trace.tip_sigma) < 4 * step:
            continue
        sdd, tdd = (16.0 * stencil(st.sigma, step / 2) - stencil(st.sigma, step)) / 15.0
        psi = math.tanh(st.s)
        dpsi = 1.0 - psi * psi
        e1 = sdd - psi * dpsi * st.theta_dot**2
        e2 = tdd + 2.0 * (dpsi / psi) * st.s_dot * st.theta_dot
        worst = max(worst, abs(float(e1)), abs(float(e2)))
    return worst


# Cartesian mode ---------------------------------------------------------------


@dataclass
class CartesianTrace:
    sigma: np.ndarray
    xy: np.ndarray  # shape (n, 2)
    velocity: np.ndarray
    E: float
    dense: object = field(repr=False, default=None)

    def position(self, sigma: float) -> np.ndarray:
        return self.dense(sigma)[:2]


def _cart_rhs(y, E):
    x, v = y[:2], y[2:]
    D = E + x @ x
    grad_log_phi = -2.0 * x / D
    # x''^k = -Gamma^k_ij v^i v^j for g = phi * delta
    acc = -(v * (v @ grad_log_phi) - 0.5 * (v @ v) * grad_log_phi)
    return np.concatenate([v, acc])


def integrate_cartesian(xy0, v0, sigma_span: tuple[float, float], E: float = 1.0, rtol: float = 1e-11, atol: float = 1e-12) -> CartesianTrace:
    """Geodesics in the Cartesian chart ``(dx^2 + dy^2)/(E + r^2)``; regular through the tip."""
    y0 = np.concatenate([np.asarray(xy0, float), np.asarray(v0, float)])
    sol = solve_ivp(lambda s, y: _cart_rhs(y, E), sigma_span, y0, method="RK45", rtol=rtol, atol=atol, dense_output=True)
    if sol.status == -1:
        raise DomainError(f"Cartesian geodesic integration failed: {sol.message}")
    return CartesianTrace(sol.t, sol.y[:2].T, sol.y[2:].T, E, sol.sol)


def state_to_cartesian(state: GeodesicState, E: float) -> tuple[np.ndarray, np.ndarray]:
    """Position and velocity of a geodesic polar state in the Cartesian chart."""
    r = math.sqrt(E) * math.sinh(state.s)
    dr = math.sqrt(E) * math.cosh(state.s) * state.s_dot
    c, s = math.cos(state.theta), math.sin(state.theta)
    pos = np.array([r * c, r * s])
    vel = np.array([dr * c - r * s * state.theta_dot, dr * s + r * c * state.theta_dot])
    return pos, vel

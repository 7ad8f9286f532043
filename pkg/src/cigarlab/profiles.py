"""One-variable functions with known first and second derivatives.

Free-function field families and warped metrics draw from this table instead
of accepting arbitrary code, so specs stay JSON-serialisable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import finite_diff as fd
from .errors import GeometryError


@dataclass(frozen=True)
class Profile:
    """A smooth function of one real variable.

    Missing derivatives fall back to finite differences.
    """

    name: str
    f: Callable[[float], float]
    df: Optional[Callable[[float], float]] = None
    d2f: Optional[Callable[[float], float]] = None
    spec: dict = field(default_factory=dict, compare=False)

    def __call__(self, x: float) -> float:
        return self.f(x)

    def d1(self, x: float) -> float:
        return self.df(x) if self.df is not None else fd.derivative_1d(self.f, x)

    def d2(self, x: float) -> float:
        return self.d2f(x) if self.d2f is not None else fd.second_derivative_1d(self.f, x)

    def to_json(self) -> dict:
        return dict(self.spec)


def _sech2(x):
    return 1.0 / np.cosh(x) ** 2


def exp_profile(scale: float = 1.0) -> Profile:
    return Profile(
        "exp",
        lambda x: scale * np.exp(x),
        lambda x: scale * np.exp(x),
        lambda x: scale * np.exp(x),
        {"kind": "exp", "scale": scale},
    )


def poly_profile(coeffs) -> Profile:
    """``sum(c_k x^k)`` with coefficients in increasing degree."""
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        c = np.zeros(1)
    p = np.polynomial.Polynomial(c)
    dp, d2p = p.deriv(1), p.deriv(2)
    return Profile("poly", p, dp, d2p, {"kind": "poly", "coeffs": [float(v) for v in c]})


def tanh_shift_profile(shift: float = 0.0, scale: float = 1.0) -> Profile:
    """``tanh(scale * x) / scale + shift``; scale rescales the cigar (1/sqrt(A) tanh(sqrt(A) x) for scale = sqrt(A))."""
    return Profile(
        "tanh_shift",
        lambda x: np.tanh(scale * x) / scale + shift,
        lambda x: _sech2(scale * x),
        lambda x: -2.0 * scale * _sech2(scale * x) * np.tanh(scale * x),
        {"kind": "tanh_shift", "shift": shift, "scale": scale},
    )


def sin_profile() -> Profile:
    return Profile("sin", np.sin, np.cos, lambda x: -np.sin(x), {"kind": "sin"})


def identity_profile() -> Profile:
    return poly_profile([0.0, 1.0])


_TABLE = {
    "exp": lambda d: exp_profile(float(d.get("scale", 1.0))),
    "poly": lambda d: poly_profile(d.get("coeffs", [0.0, 1.0])),
    "tanh_shift": lambda d: tanh_shift_profile(float(d.get("shift", 0.0)), float(d.get("scale", 1.0))),
    "tanh": lambda d: tanh_shift_profile(0.0, float(d.get("scale", 1.0))),
    "sin": lambda d: sin_profile(),
}


def profile_from_json(doc) -> Profile:
    """Build a profile from ``{"kind": ..., ...}`` or a bare kind name."""
    if isinstance(doc, str):
        doc = {"kind": doc}
    kind = doc.get("kind")
    if kind not in _TABLE:
        raise GeometryError(f"unknown function kind {kind!r}; choose from {sorted(_TABLE)}")
    return _TABLE[kind](doc)


def is_sqrt_quadratic_in(w: Profile, psi: Profile, grid) -> tuple[float, float, float]:
    """Least-squares fit of ``w^2 = A psi^2 + B`` on ``grid``; returns ``(A, B, rms residual)``."""
    grid = np.asarray(grid, dtype=float)
    lhs = np.array([w(s) ** 2 for s in grid])
    design = np.column_stack([np.array([psi(s) ** 2 for s in grid]), np.ones_like(grid)])
    coef, *_ = np.linalg.lstsq(design, lhs, rcond=None)
    resid = lhs - design @ coef
    return float(coef[0]), float(coef[1]), float(math.sqrt(np.mean(resid**2)))

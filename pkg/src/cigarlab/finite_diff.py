"""Fourth-order central differences with Richardson step control.

Every derivative is evaluated at steps ``h`` and ``h/2``; the difference of the
two estimates is the error indicator, and the returned value is the Richardson
combination ``(16 D(h/2) - D(h)) / 15``.  When the indicator exceeds the
tolerance the step is shrunk a few times before giving up with
:class:`~cigarlab.errors.StepSizeError`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepSizeError

_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
# Integer weights (applied before the single division by 12) cancel exactly on constants.
_D1 = np.array([1.0, -8.0, 8.0, -1.0])
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0])
_D2_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


@dataclass(frozen=True)
class StepControl:
    """Step-size policy for the differencing routines.

    ``h1``/``h2`` are base steps for first/second derivatives, ``rtol`` is the
    accepted Richardson disagreement relative to the magnitude of the field and
    its derivative (plus the absolute floor ``atol``), ``max_shrink`` the number of times the step may be divided
    by four before failing.  ``min_step_fraction`` caps the step along axes that
    must stay positive (radial coordinates of singular charts).
    """

    h1: float = 4e-3
    h2: float = 2e-2
    rtol: float = 1e-6
    atol: float = 1e-12
    max_shrink: int = 3
    min_step_fraction: float = 0.2


DEFAULT_STEP = StepControl()


def _cap(h: float, q: np.ndarray, positive_axes: tuple[int, ...], frac: float) -> float:
    for ax in positive_axes:
        h = min(h, frac * q[ax])
    return h


def _check(d_coarse, d_fine, f0, step, scale_floor=0.0):
    err = np.max(np.abs(d_fine - d_coarse)) if np.size(d_fine) else 0.0
    scale = max(np.max(np.abs(d_fine)), np.max(np.abs(f0)), scale_floor)
    return err <= step.rtol * scale + step.atol, err, scale


def _d1_once(func, q, axis, h):
    e = np.zeros_like(q)
    e[axis] = 1.0
    acc = 0.0
    for off, w in zip(_OFFSETS, _D1):
        acc = acc + w * np.asarray(func(q + off * h * e), dtype=float)
    return acc / (12.0 * h)


def partial(
    func: Callable[[np.ndarray], np.ndarray],
    q: np.ndarray,
    axis: int,
    step: StepControl = DEFAULT_STEP,
    positive_axes: tuple[int, ...] = (),
    f0=None,
    scale_floor: float = 0.0,
) -> np.ndarray:
    """First partial derivative of an array-valued ``func`` along ``axis`` at ``q``.

    ``scale_floor`` bounds the magnitude used by the Richardson acceptance test
    from below.  Pass it when ``func`` is itself a cancelling combination of
    larger terms, so its round-off is judged against the size of those terms.
    """
    q = np.asarray(q, dtype=float)
    f0 = np.asarray(func(q), dtype=float) if f0 is None else f0
    h = _cap(step.h1, q, positive_axes, step.min_step_fraction)
    err = scale = np.inf
    for _ in range(step.max_shrink + 1):
        coarse = _d1_once(func, q, axis, h)
        fine = _d1_once(func, q, axis, h / 2)
        ok, err, scale = _check(coarse, fine, f0, step, scale_floor)
        if ok:
            return (16.0 * fine - coarse) / 15.0
        h /= 4.0
    raise StepSizeError(
        f"first derivative along axis {axis} at {q}: Richardson disagreement {err:.3e} "
        f"exceeds {step.rtol:.1e} x scale {scale:.3e}"
    )


def gradient(func, q, step: StepControl = DEFAULT_STEP, positive_axes=(), scale_floor: float = 0.0) -> np.ndarray:
    """Stack of partials, shape ``(2, *func(q).shape)``."""
    q = np.asarray(q, dtype=float)
    f0 = np.asarray(func(q), dtype=float)
    return np.stack([partial(func, q, a, step, positive_axes, f0, scale_floor) for a in range(q.size)])


def _d2_once(func, q, i, j, h):
    ei = np.zeros_like(q)
    ei[i] = 1.0
    if i == j:
        acc = 0.0
        for off, w in zip(_D2_OFFSETS, _D2):
            acc = acc + w * np.asarray(func(q + off * h * ei), dtype=float)
        return acc / (12.0 * h * h)
    ej = np.zeros_like(q)
    ej[j] = 1.0
    acc = 0.0
    for oi, wi in zip(_OFFSETS, _D1):
        for oj, wj in zip(_OFFSETS, _D1):
            acc = acc + wi * wj * np.asarray(func(q + oi * h * ei + oj * h * ej), dtype=float)
    return acc / (144.0 * h * h)


def second_partial(func, q, i: int, j: int, step: StepControl = DEFAULT_STEP, positive_axes=(), f0=None):
    q = np.asarray(q, dtype=float)
    f0 = np.asarray(func(q), dtype=float) if f0 is None else f0
    h = _cap(step.h2, q, positive_axes, step.min_step_fraction / 2)
    err = scale = np.inf
    for _ in range(step.max_shrink + 1):
        coarse = _d2_once(func, q, i, j, h)
        fine = _d2_once(func, q, i, j, h / 2)
        ok, err, scale = _check(coarse, fine, f0, step)
        if ok:
            return (16.0 * fine - coarse) / 15.0
        h /= 4.0
    raise StepSizeError(
        f"second derivative ({i},{j}) at {q}: Richardson disagreement {err:.3e} "
        f"exceeds {step.rtol:.1e} x scale {scale:.3e}"
    )


def hessian_matrix(func, q, step: StepControl = DEFAULT_STEP, positive_axes=()) -> np.ndarray:
    """All second partials, shape ``(2, 2, *func(q).shape)``; symmetric by construction."""
    q = np.asarray(q, dtype=float)
    f0 = np.asarray(func(q), dtype=float)
    n = q.size
    out = np.empty((n, n) + f0.shape)
    for i in range(n):
        for j in range(i, n):
            out[i, j] = second_partial(func, q, i, j, step, positive_axes, f0)
            out[j, i] = out[i, j]
    return out


def derivative_1d(func: Callable[[float], float], x: float, step: StepControl = DEFAULT_STEP) -> float:
    """Scalar convenience wrapper for functions of one variable."""
    return float(partial(lambda q: func(q[0]), np.array([x], dtype=float), 0, step))


def second_derivative_1d(func: Callable[[float], float], x: float, step: StepControl = DEFAULT_STEP) -> float:
    return float(second_partial(lambda q: func(q[0]), np.array([x], dtype=float), 0, 0, step))

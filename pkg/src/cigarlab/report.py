"""Deterministic CSV, JSON and SVG emitters.

Every writer goes through :func:`atomic_write` (temporary file in the target
directory, then ``os.replace``) so a crashed run never leaves a half-written
artifact.  Floats are printed with 17 significant digits so that values
round-trip exactly; no timestamps or timings are written, which keeps
identical runs byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .charts import ChartKind
from .geodesics import GeodesicTrace
from .soliton import SolitonResidual

SCHEMA_VERSION = "1.0"

RESIDUAL_HEADER = ("chart", "c1", "c2", "rho", "t", "res_11", "res_12", "res_22", "frobenius")
TRACE_HEADER = ("sigma", "s", "theta", "s_dot", "theta_dot", "ell", "k", "r")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, ChartKind):
        return obj.value
    return obj


def to_json_text(doc: dict) -> str:
    """Stable JSON: sorted keys, shortest round-trip floats (17 digits at most)."""
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path | str, doc: dict) -> Path:
    doc = dict(doc)
    doc.setdefault("version", SCHEMA_VERSION)
    return atomic_write(path, to_json_text(doc))


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def residual_rows(residuals: Sequence[SolitonResidual]) -> list[tuple]:
    return [
        (r.point.kind.value, r.point.c1, r.point.c2, float(r.rho), float(r.t),
         float(r.residual[0, 0]), float(r.residual[0, 1]), float(r.residual[1, 1]), float(r.norm))
        for r in residuals
    ]


def residual_csv(residuals: Sequence[SolitonResidual]) -> str:
    return csv_text(RESIDUAL_HEADER, residual_rows(residuals))


def trace_rows(trace: GeodesicTrace) -> list[tuple]:
    r = trace.r_values()
    return [
        (st.sigma, st.s, st.theta, st.s_dot, st.theta_dot, cp.ell, cp.k, float(ri))
        for st, cp, ri in zip(trace.states, trace.conserved, r)
    ]


def trace_csv(trace: GeodesicTrace) -> str:
    return csv_text(TRACE_HEADER, trace_rows(trace))


def write_residual_csv(path, residuals) -> Path:
    return atomic_write(path, residual_csv(residuals))


def write_trace_csv(path, trace: GeodesicTrace) -> Path:
    return atomic_write(path, trace_csv(trace))


def trace_svg(traces: Sequence[GeodesicTrace], size: int = 400, r_max: float | None = None) -> str:
    """The ``(r, theta)`` paths drawn in the plane: axes, one ``<path>`` per trace,
    and a circle at each turning point."""
    pts = []
    for tr in traces:
        r = tr.r_values()
        th = np.array([st.theta for st in tr.states])
        pts.append((r * np.cos(th), r * np.sin(th)))
    if r_max is None:
        r_max = max([float(np.max(np.abs(np.concatenate(p)))) for p in pts] + [1.0])
    half = size / 2.0
    k = 0.95 * half / r_max

    def X(x):
        return half + k * x

    def Y(y):
        return half - k * y

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<line x1="0" y1="{fmt(half)}" x2="{size}" y2="{fmt(half)}" stroke="#999" stroke-width="1"/>',
        f'<line x1="{fmt(half)}" y1="0" x2="{fmt(half)}" y2="{size}" stroke="#999" stroke-width="1"/>',
    ]
    for i, (tr, (x, y)) in enumerate(zip(traces, pts)):
        d = " ".join(f"{'M' if j == 0 else 'L'}{X(a):.4f},{Y(b):.4f}" for j, (a, b) in enumerate(zip(x, y)))
        label = escape(f"ell={fmt(tr.reference.ell)} k={fmt(tr.reference.k)}")
        lines.append(f'<path id="trace{i}" d="{d}" fill="none" stroke="#1f4e99" stroke-width="1.5"><title>{label}</title></path>')
        tp = tr.turning_point
        if tp is not None:
            th = float(tr.at(tp.sigma)[1])
            lines.append(
                f'<circle cx="{X(tp.r_min * math.cos(th)):.4f}" cy="{Y(tp.r_min * math.sin(th)):.4f}" r="3" fill="#c0392b"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_trace_svg(path, traces: Sequence[GeodesicTrace], size: int = 400) -> Path:
    return atomic_write(path, trace_svg(traces, size))

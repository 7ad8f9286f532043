"""Numerical differential geometry of the cigar steady soliton.

Charts and metrics, finite-difference tensor calculus, a classifier for
Killing, conformal and mixed Killing vector fields, soliton-identity residuals,
the rotationally symmetric rigidity ODE, and geodesics with conserved-quantity
monitoring.
"""
from .charts import ChartKind, ChartPoint, SolitonParams, chart_jacobian, convert
from .errors import GeometryError
from .fields import ClassKind, FieldClass, VectorFieldSpec, catalog, classify, rank_of_span
from .geodesics import ConservedPair, GeodesicState, GeodesicTrace, integrate, turning_point
from .metrics import MetricSpec, cigar, flat, metric_field, product, warped
from .soliton import rigidity_ode_solve, soliton_residual

__version__ = "0.1.0"

__all__ = [
    "ChartKind",
    "ChartPoint",
    "ClassKind",
    "ConservedPair",
    "FieldClass",
    "GeodesicState",
    "GeodesicTrace",
    "GeometryError",
    "MetricSpec",
    "SolitonParams",
    "VectorFieldSpec",
    "catalog",
    "chart_jacobian",
    "cigar",
    "classify",
    "convert",
    "flat",
    "integrate",
    "metric_field",
    "product",
    "rank_of_span",
    "rigidity_ode_solve",
    "soliton_residual",
    "turning_point",
    "warped",
]

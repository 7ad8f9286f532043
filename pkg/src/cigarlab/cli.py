"""Command-line entry point.

Every command writes its artifacts atomically into the output directory
(``--output-dir``, else ``$CIGARLAB_OUTPUT_DIR``, else ``./cigarlab-out``) and
prints a JSON summary.  Exit status: 0 all checks within tolerance,
1 a check failed, 2 usage or config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import faults, report
from .calculus import conformal_gauss_curvature, gauss_curvature
from .charts import ChartKind, ChartPoint, SolitonParams, convert
from .errors import GeometryError
from .fields import (
    CONFORMAL_BASIS,
    DEFAULT_ANNULUS,
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_SEED,
    VectorFieldSpec,
    catalog,
    classify,
    default_sample,
    field_from_json,
    rank_of_span,
    span_singular_values,
)
from .geodesics import ConservedPair, StepOptions, equation_residual, integrate, radial_equation_check, state_from_conserved, turning_point
from .metrics import MetricSpec, cigar, cigar_curvature_formula, cigar_log_conformal_factor, metric_field, metric_from_json, product
from .soliton import curvature_along_profile, residual_grid, residual_grid_points, rigidity_closed_form, rigidity_ode_solve
from .suite import full_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
OUTPUT_ENV = "CIGARLAB_OUTPUT_DIR"
COMMANDS = ("verify-soliton", "classify-field", "geodesic", "curvature-profile", "rank-check", "rigidity-ode", "full-suite")
FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    """The run configuration does not match the schema."""


@dataclass(frozen=True)
class SampleSpec:
    kind: str = "quasi_random"
    count: int = DEFAULT_SAMPLE_SIZE
    seed: int = DEFAULT_SEED
    region: tuple[float, float] = DEFAULT_ANNULUS

    def __post_init__(self):
        if self.kind not in ("quasi_random", "grid"):
            raise ConfigError(f"sample.kind must be 'quasi_random' or 'grid', got {self.kind!r}")
        if self.count < 1:
            raise ConfigError("sample.count must be positive")
        lo, hi = self.region
        if not 0.0 < lo < hi:
            raise ConfigError(f"sample.region must satisfy 0 < lo < hi, got {self.region}")

    def points(self, chart: ChartKind, params: SolitonParams) -> list[ChartPoint]:
        if self.kind == "quasi_random":
            return default_sample(chart, params, n=self.count, seed=self.seed, annulus=self.region)
        m = max(1, int(math.ceil(math.sqrt(self.count))))
        lo, hi = self.region
        pts = [ChartPoint.geodesic_polar(s, th) for s in np.linspace(lo, hi, m) for th in np.linspace(0.0, 2 * math.pi, m, endpoint=False) + 0.1]
        return [convert(p, chart, params) for p in pts[: self.count]]


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; identical configs give byte-identical artifacts."""

    command: str
    metric: Optional[MetricSpec] = None
    vector_field: Optional[VectorFieldSpec] = None
    sample: SampleSpec = field(default_factory=SampleSpec)
    output_dir: Path = Path("cigarlab-out")
    formats: tuple[str, ...] = FORMATS
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    faults: tuple[str, ...] = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output format(s) {sorted(bad)}")
        unknown = set(self.faults) - faults.KNOWN
        if unknown:
            raise ConfigError(f"unknown fault(s) {sorted(unknown)}; choose from {sorted(faults.KNOWN)}")

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def opt(self, name: str, default=None):
        v = self.options.get(name)
        return default if v is None else v

    def metadata(self) -> dict:
        return {
            "command": self.command,
            "seed": self.sample.seed,
            "sample": {"kind": self.sample.kind, "count": self.sample.count, "region": list(self.sample.region)},
            "metric": None if self.metric is None else self.metric.to_json(),
            "field": None if self.vector_field is None else self.vector_field.to_json(),
            "tolerances": dict(sorted(self.tolerances.items())),
            "options": {k: v for k, v in sorted(self.options.items()) if v is not None},
            "faults": sorted(self.faults),
        }


_CONFIG_KEYS = {"command", "metric", "field", "sample", "output", "tolerances", "options", "faults"}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _field_params(pairs: Sequence[str]) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v)
    return out


def build_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    """Merge ``--config`` (if any) with explicit flags; flags win."""
    doc: dict = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(doc) - _CONFIG_KEYS
        if extra:
            raise ConfigError(f"unknown config key(s) {sorted(extra)}")
        if doc.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {doc['command']!r} but {args.command!r} was requested")

    options = dict(doc.get("options", {}))
    for name, value in vars(args).items():
        if name.startswith("opt_") and value is not None:
            options[name[4:]] = value

    sdoc = dict(doc.get("sample", {}))
    if args.seed is not None:
        sdoc["seed"] = args.seed
    if getattr(args, "n", None) is not None:
        sdoc["count"] = args.n
    try:
        sample = SampleSpec(
            kind=sdoc.get("kind", "quasi_random"),
            count=int(sdoc.get("count", DEFAULT_SAMPLE_SIZE)),
            seed=int(sdoc.get("seed", DEFAULT_SEED)),
            region=tuple(float(v) for v in sdoc.get("region", DEFAULT_ANNULUS)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sample spec: {exc}") from exc

    rho = options.get("rho", 0.0)
    t = options.get("t", 0.0)
    try:
        metric = metric_from_json(doc["metric"]) if "metric" in doc else None
        fdoc = dict(doc.get("field", {}))
        if getattr(args, "name", None):
            fdoc["name"] = args.name
        fdoc.update(_field_params(getattr(args, "param", None)))
        if fdoc.get("name") == "xi":
            fdoc.setdefault("rho", rho)
            fdoc.setdefault("t", t)
        vfield = field_from_json(fdoc) if "name" in fdoc else None
    except (GeometryError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad metric or field spec: {exc}") from exc

    out = dict(doc.get("output", {}))
    out_dir = args.output_dir or out.get("dir") or environ.get(OUTPUT_ENV) or "cigarlab-out"
    formats = tuple(out.get("format", FORMATS)) if not isinstance(out.get("format"), str) else (out["format"],)
    fault_names = tuple(args.inject_fault or doc.get("faults", ()))
    tolerances = {k: float(v) for k, v in doc.get("tolerances", {}).items()}
    if getattr(args, "tol", None) is not None:
        tolerances["main"] = args.tol
    return RunConfig(args.command, metric, vfield, sample, Path(out_dir), formats, tolerances, options, fault_names)


# Commands ---------------------------------------------------------------------


@dataclass
class Outcome:
    passed: bool
    summary: dict
    failures: list = field(default_factory=list)


def _emit_json(cfg: RunConfig, name: str, doc: dict) -> None:
    if "json" in cfg.formats:
        report.write_json(cfg.output_dir / name, doc)


def cmd_verify_soliton(cfg: RunConfig) -> Outcome:
    params = SolitonParams(float(cfg.opt("rho", 0.0)), float(cfg.opt("t", 0.0)))
    tol = cfg.tol("main", 1e-6)
    pts = residual_grid_points(int(cfg.opt("grid_points", 25)), float(cfg.opt("r_max", 5.0)))
    res = residual_grid(params, pts)
    worst = max(r.norm for r in res)
    if "csv" in cfg.formats:
        report.write_residual_csv(cfg.output_dir / "soliton_residuals.csv", res)
    summary = {**cfg.metadata(), "E": params.E, "max_frobenius": worst, "tolerance": tol, "passed": worst < tol}
    _emit_json(cfg, "soliton_summary.json", summary)
    fails = [] if worst < tol else [{"check": "soliton_residual", "measured": worst, "tolerance": tol}]
    return Outcome(worst < tol, summary, fails)


def cmd_classify_field(cfg: RunConfig) -> Outcome:
    if cfg.vector_field is None:
        raise ConfigError("classify-field needs --name (or a 'field' entry in the config)")
    V = cfg.vector_field
    if cfg.metric is not None:
        g = cfg.metric
    elif V.name == "product_test":
        g = product()
    else:
        g = cigar(float(cfg.opt("rho", 0.0)), float(cfg.opt("t", 0.0)), V.chart)
    sample = cfg.sample.points(g.chart, g.params)
    fc = classify(V, g, sample, tol=cfg.tol("main", 1e-6))
    summary = {**cfg.metadata(), "metric": g.to_json(), **fc.to_json()}
    _emit_json(cfg, "classification.json", summary)
    expect = cfg.opt("expect")
    ok = expect is None or expect == fc.kind.value
    fails = [] if ok else [{"check": "expected_class", "expected": expect, "got": fc.kind.value}]
    return Outcome(ok, summary, fails)


def cmd_geodesic(cfg: RunConfig) -> Outcome:
    k, ell = float(cfg.opt("k", 1.0)), float(cfg.opt("ell", 0.6))
    E = float(cfg.opt("E", 1.0))
    lo, hi = (float(v) for v in cfg.opt("span", (-5.0, 5.0)))
    pair = ConservedPair(ell, k)
    if not pair.admissible:
        raise ConfigError(f"(k={k}, ell={ell}) is not admissible: need k > ell^2 and k > 0")
    s0 = cfg.opt("s0")
    if s0 is None:
        s0 = turning_point(pair, E)[0] if ell != 0.0 else 1.0
    sigma0 = min(max(0.0, lo), hi)
    start = state_from_conserved(pair, float(s0), inbound=bool(cfg.opt("inbound", False)), sigma=sigma0)
    trace = integrate(start, (lo, hi), StepOptions(E=E))
    if "csv" in cfg.formats:
        report.write_trace_csv(cfg.output_dir / "geodesic_trace.csv", trace)
    if "svg" in cfg.formats:
        report.write_trace_svg(cfg.output_dir / "geodesic_trace.svg", [trace])
    summary = {
        **cfg.metadata(),
        **trace.summary(),
        "radial_equation_defect": radial_equation_check(trace),
        "equation_residual": equation_residual(trace),
    }
    if ell != 0.0:
        s_min, r_min = turning_point(pair, E)
        summary["turning_point_formula"] = {"s_min": s_min, "r_min": r_min}
    _emit_json(cfg, "geodesic_summary.json", summary)
    fails = [] if not trace.failed else [{"check": "drift", "drift_ell": trace.drift_ell, "drift_k": trace.drift_k, "budget": trace.drift_budget}]
    return Outcome(not trace.failed, summary, fails)


def cmd_curvature_profile(cfg: RunConfig) -> Outcome:
    params = SolitonParams(float(cfg.opt("rho", 0.0)), float(cfg.opt("t", 0.0)))
    E = params.E
    g = metric_field(cigar(params.rho, params.t))
    log_u = cigar_log_conformal_factor(params)
    radii = np.linspace(0.0, float(cfg.opt("r_max", 5.0)), int(cfg.opt("points", 21)))
    rows, err_lin, err_sq = [], 0.0, 0.0
    for r in radii:
        p = ChartPoint.cartesian(float(r), 0.0)
        K = gauss_curvature(g, p)
        K_conf = conformal_gauss_curvature(log_u, p)
        lin, sq = cigar_curvature_formula(E, r), cigar_curvature_formula(E, r, True)
        err_lin, err_sq = max(err_lin, abs(K - lin) / abs(K)), max(err_sq, abs(K - sq) / abs(K))
        rows.append((float(r), K, K_conf, lin, sq))
    if "csv" in cfg.formats:
        report.atomic_write(cfg.output_dir / "curvature_profile.csv",
                            report.csv_text(("r", "K_brioschi", "K_conformal", "K_single_denominator", "K_squared_denominator"), rows))
    tol = cfg.tol("main", 1e-6)
    ok = (err_lin < tol) != (err_sq < tol)
    summary = {**cfg.metadata(), "E": E, "rel_err_single_denominator": err_lin, "rel_err_squared_denominator": err_sq,
               "matched": "2E/(E+r^2)" if err_lin < tol else "2E/(E+r^2)^2" if err_sq < tol else "neither", "passed": ok}
    _emit_json(cfg, "curvature_profile.json", summary)
    return Outcome(ok, summary, [] if ok else [{"check": "curvature_formula", "rel_err": [err_lin, err_sq], "tolerance": tol}])


def cmd_rank_check(cfg: RunConfig) -> Outcome:
    params = SolitonParams(float(cfg.opt("rho", 0.0)), float(cfg.opt("t", 0.0)))
    five = [catalog(n) for n in CONFORMAL_BASIS] + [catalog("fifth_basis", rho=params.rho, t=params.t)]
    seeds = [cfg.sample.seed + i for i in range(int(cfg.opt("resamples", 3)))]
    per_seed, ok = [], True
    tol = cfg.tol("main", 1e-6)
    for s in seeds:
        sample = default_sample(ChartKind.CARTESIAN, params, n=cfg.sample.count, seed=s, annulus=cfg.sample.region)
        sv = span_singular_values(five, sample, params)
        r5, r4 = rank_of_span(five, sample, params=params), rank_of_span(five[:4], sample, params=params)
        ratio = float(sv[-1] / sv[0])
        ok &= r5 == 5 and r4 == 4 and ratio > tol
        per_seed.append({"seed": s, "singular_values": sv, "rank5": r5, "rank4": r4, "sigma5_over_sigma1": ratio})
    summary = {**cfg.metadata(), "fields": [V.name for V in five], "samples": per_seed, "passed": ok}
    _emit_json(cfg, "rank_check.json", summary)
    return Outcome(ok, summary, [] if ok else [{"check": "rank", "samples": per_seed}])


def cmd_rigidity_ode(cfg: RunConfig) -> Outcome:
    A = float(cfg.opt("A", 1.0))
    prof = rigidity_ode_solve(A, float(cfg.opt("r_max", 8.0)), float(cfg.opt("step", 0.05)))
    closed = rigidity_closed_form(A, prof.grid)
    K = np.concatenate([[2.0 * A], curvature_along_profile(prof, prof.grid[1:])])
    err = float(np.max(np.abs(prof.h_values - closed)))
    tol = cfg.tol("main", 1e-8)
    if "csv" in cfg.formats:
        rows = [(float(r), float(h), float(c), float(hp), float(k)) for r, h, c, hp, k in zip(prof.grid, prof.h_values, closed, prof.hp_values, K)]
        report.atomic_write(cfg.output_dir / "rigidity_profile.csv", report.csv_text(("r", "h", "h_closed", "h_prime", "K"), rows))
    ok = err < tol and bool(np.all(K > 0))
    summary = {**cfg.metadata(), "A": A, "max_abs_err": err, "min_K": float(np.min(K)), "tolerance": tol, "passed": ok}
    _emit_json(cfg, "rigidity_summary.json", summary)
    return Outcome(ok, summary, [] if ok else [{"check": "rigidity", "max_abs_err": err, "min_K": float(np.min(K))}])


def cmd_full_suite(cfg: RunConfig) -> Outcome:
    doc = full_suite(cfg.sample.seed, cfg.faults, reproducibility=not cfg.opt("no_repro", False))
    doc["version"] = report.SCHEMA_VERSION
    _emit_json(cfg, "suite_results.json", doc)
    fails = [c for c in doc["checks"] if not c["passed"]]
    return Outcome(doc["all_passed"], doc, fails)


HANDLERS = {
    "verify-soliton": cmd_verify_soliton,
    "classify-field": cmd_classify_field,
    "geodesic": cmd_geodesic,
    "curvature-profile": cmd_curvature_profile,
    "rank-check": cmd_rank_check,
    "rigidity-ode": cmd_rigidity_ode,
    "full-suite": cmd_full_suite,
}


# Parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; explicit flags override it")
    common.add_argument("--output-dir", help=f"artifact directory (default ${OUTPUT_ENV} or ./cigarlab-out)")
    common.add_argument("--seed", type=int, help=f"sampling seed (default {DEFAULT_SEED})")
    common.add_argument("--json", action="store_true", help="print the JSON document instead of a table")
    common.add_argument("--inject-fault", action="append", choices=sorted(faults.KNOWN), help="debug: break one formula on purpose")
    common.add_argument("--tol", type=float, help="override the main tolerance of the command")

    def params(p):
        p.add_argument("--rho", dest="opt_rho", type=float)
        p.add_argument("--t", dest="opt_t", type=float)

    parser = argparse.ArgumentParser(prog="cigarlab", description="Numerical checks for the cigar soliton and its symmetry fields.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("verify-soliton", parents=[common], help="soliton identity residual on a radial grid")
    params(p)
    p.add_argument("--grid-points", dest="opt_grid_points", type=int)
    p.add_argument("--r-max", dest="opt_r_max", type=float)

    p = sub.add_parser("classify-field", parents=[common], help="Killing / conformal / mixed Killing classification")
    params(p)
    p.add_argument("--name", help="catalog field name (dx, dy, rotation, dilation, xi, fifth_basis, radial_mk, mixed_mk, radial_test, angular_test, product_test)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="field parameter; VALUE is parsed as JSON when possible")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--expect", dest="opt_expect", choices=["killing", "conformal", "mixed_killing", "none"])

    p = sub.add_parser("geodesic", parents=[common], help="integrate one geodesic and export the trace")
    p.add_argument("--k", dest="opt_k", type=float)
    p.add_argument("--ell", dest="opt_ell", type=float)
    p.add_argument("--E", dest="opt_E", type=float)
    p.add_argument("--span", dest="opt_span", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--s0", dest="opt_s0", type=float, help="starting s (default: the turning point)")
    p.add_argument("--inbound", dest="opt_inbound", action="store_const", const=True)

    p = sub.add_parser("curvature-profile", parents=[common], help="K(r) against both closed forms")
    params(p)
    p.add_argument("--r-max", dest="opt_r_max", type=float)
    p.add_argument("--points", dest="opt_points", type=int)

    p = sub.add_parser("rank-check", parents=[common], help="rank of the five-field span under resampling")
    params(p)
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--resamples", dest="opt_resamples", type=int)

    p = sub.add_parser("rigidity-ode", parents=[common], help="solve h' = 1 - A h^2 and compare with the closed form")
    p.add_argument("--A", dest="opt_A", type=float)
    p.add_argument("--r-max", dest="opt_r_max", type=float)
    p.add_argument("--step", dest="opt_step", type=float)

    p = sub.add_parser("full-suite", parents=[common], help="run every acceptance check")
    p.add_argument("--no-repro", dest="opt_no_repro", action="store_const", const=True, help="skip the rerun used by the reproducibility check")
    return parser


def _print_table(doc: dict, out) -> None:
    for c in doc["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['id']:2d} {c['name']:<26s} measured {c['measured']:.3e} {c['sense']} {c['tolerance']:.1e}", file=out)
        if "error" in c:
            print(f"      {c['error']}", file=out)
    print(f"{sum(c['passed'] for c in doc['checks'])}/{len(doc['checks'])} checks passed (seed {doc['seed']})", file=out)


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(json.dumps({"status": "usage_error", "message": str(exc)}), file=stderr)
        return EXIT_USAGE
    try:
        with faults.inject(*(cfg.faults if cfg.command != "full-suite" else ())):
            outcome = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(json.dumps({"status": "usage_error", "message": str(exc)}), file=stderr)
        return EXIT_USAGE
    except (GeometryError, ArithmeticError, OSError) as exc:
        print(json.dumps({"status": "runtime_error", "error": type(exc).__name__, "message": str(exc)}), file=stderr)
        return EXIT_RUNTIME

    if cfg.command == "full-suite" and not args.json:
        _print_table(outcome.summary, stdout)
    else:
        stdout.write(report.to_json_text({"version": report.SCHEMA_VERSION, **outcome.summary}))
    if not outcome.passed:
        print(report.to_json_text({"status": "check_failed", "command": cfg.command, "failures": outcome.failures}).strip(), file=stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

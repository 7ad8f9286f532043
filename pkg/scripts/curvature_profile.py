"""Gaussian curvature of the cigar along a ray, for several values of E.

Compares the Brioschi value, the conformal-factor value and the two candidate
closed forms 2E/(E+r^2) and 2E/(E+r^2)^2, and writes one CSV per E.
"""
import argparse
from pathlib import Path

import numpy as np

from cigarlab import report
from cigarlab.calculus import conformal_gauss_curvature, gauss_curvature
from cigarlab.charts import ChartPoint
from cigarlab.metrics import cigar_curvature_formula, cigar_log_conformal_factor, cigar_with_raw_E_for_testing, metric_field


def main() -> None:
    ap = argparse.ArgumentParser(description="curvature profile of the cigar")
    ap.add_argument("--E", type=float, nargs="+", default=[0.5, 1.0, 4.0])
    ap.add_argument("--r-max", type=float, default=5.0)
    ap.add_argument("--points", type=int, default=26)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    header = ("r", "K_brioschi", "K_conformal", "K_single_denominator", "K_squared_denominator")
    for E in args.E:
        spec = cigar_with_raw_E_for_testing(E)
        g, log_u = metric_field(spec), cigar_log_conformal_factor(spec.params)
        rows = []
        for r in np.linspace(0.0, args.r_max, args.points):
            p = ChartPoint.cartesian(float(r), 0.0)
            rows.append((float(r), gauss_curvature(g, p), conformal_gauss_curvature(log_u, p),
                         cigar_curvature_formula(E, r), cigar_curvature_formula(E, r, squared_denominator=True)))
        a = np.array(rows)
        err_single = np.max(np.abs(a[:, 1] - a[:, 3]) / np.abs(a[:, 1]))
        err_squared = np.max(np.abs(a[:, 1] - a[:, 4]) / np.abs(a[:, 1]))
        path = report.atomic_write(args.out / f"curvature_E{E:g}.csv", report.csv_text(header, rows))
        print(f"E={E:g}: rel err vs 2E/(E+r^2) {err_single:.2e}, vs 2E/(E+r^2)^2 {err_squared:.2e} -> {path}")


if __name__ == "__main__":
    main()

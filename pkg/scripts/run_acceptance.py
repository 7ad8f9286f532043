"""Run the acceptance checks and print the pass/fail table.

Usage: python3 scripts/run_acceptance.py [--seed N] [--inject-fault NAME] [--out DIR]
"""
import argparse
import sys
from pathlib import Path

from cigarlab import faults, report
from cigarlab.suite import DEFAULT_SEED, full_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--inject-fault", action="append", default=[], choices=sorted(faults.KNOWN))
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    doc = full_suite(args.seed, args.inject_fault)
    for c in doc["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['id']:2d} {c['name']:<26s} measured {c['measured']:.3e} {c['sense']} {c['tolerance']:.1e}")
    path = report.write_json(args.out / "acceptance.json", doc)
    print(f"wrote {path}")
    return 0 if doc["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())

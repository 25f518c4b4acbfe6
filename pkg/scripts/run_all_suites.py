#!/usr/bin/env python3
"""Run every verification suite over one corpus and write all reports.

Produces, under --out:

    poincare/   per-check JSON reports + summary.csv
    thm33/      scalar gradient-transfer reports
    thm43/      sequence gradient-transfer reports
    fs/         vector maximal inequality reports
    bounds/     operator-norm ratio tables (bounds__*.json + bounds_summary.csv)

Exit code 0 means every hunted constant was admissible; 1 means at least
one check failed (inspect the summary CSVs for the witnesses).
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import fracmax as fm


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default="default", help="builtin name, spec JSON, or corpus dir")
    ap.add_argument("--out", default="suite_reports", help="output directory")
    ap.add_argument("--seed", type=int, default=2024, help="seed for randomized level arrays")
    args = ap.parse_args()

    corpus = fm.load_corpus(args.corpus)
    print(f"corpus {corpus.name!r}: {len(corpus.spaces)} spaces, {len(corpus.instances)} instances")

    all_passed = True
    suites = {
        "poincare": lambda: fm.run_poincare_suite(corpus),
        "thm33": lambda: fm.run_scalar_transfer_suite(corpus),
        "thm43": lambda: fm.run_sequence_transfer_suite(corpus),
        "fs": lambda: fm.run_fefferman_stein_suite(corpus, seed=args.seed),
    }
    for name, runner in suites.items():
        reports = runner()
        out_dir = os.path.join(args.out, name)
        fm.write_reports(reports, out_dir)
        n_pass = sum(r.passed for r in reports)
        all_passed &= n_pass == len(reports)
        worst = max((r.best_constant for r in reports), default=0.0)
        print(f"{name:9s} {n_pass}/{len(reports)} passed, largest constant {worst:.6g} -> {out_dir}")

    tables = fm.run_boundedness_suite(corpus)
    out_dir = os.path.join(args.out, "bounds")
    fm.write_boundedness_tables(tables, out_dir)
    for t in tables:
        ratio = t["max_ratio"]
        shown = f"{ratio:.6g}" if ratio is not None else "n/a"
        print(f"bounds    {t['experiment']:18s} max ratio {shown} "
              f"({t['instances_with_ratio']} instances)")
    print(f"bounds tables -> {out_dir}")

    return 0 if all_passed else 1


if __name__ == "__main__":
    raise SystemExit(main())

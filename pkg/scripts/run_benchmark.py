"""Default-vs-tuned comparison on the bundled datasets, then a report.

    python scripts/run_benchmark.py --out results/ [--preset default-all]
                                    [--workers N] [--seed S]

Runs ``boostbench bench`` once per CSV in data/ into ``OUT/<dataset>/``,
merges the fold tables and renders the report over all datasets. The
tuned presets search thousands of configurations per outer fold, so expect
hours on a single core; ``default-all`` finishes in a few minutes.
"""
import argparse
import csv
import sys
from pathlib import Path

from boostbench.cli import BENCH_PRESETS, main as cli_main

DATA = Path(__file__).resolve().parents[1] / "data"


def merge_folds(parts, out):
    header, rows = None, []
    for p in parts:
        with open(p, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            rows.extend(r)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "folds.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--preset", default="default-all", choices=sorted(BENCH_PRESETS))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    parts = []
    for csv_path in sorted(DATA.glob("*.csv")):
        target = args.out / csv_path.stem
        code = cli_main(["bench", "--data", str(csv_path), "--preset", args.preset,
                         "--workers", str(args.workers), "--seed", str(args.seed),
                         "--out", str(target)])
        if code:
            return code
        parts.append(target / "folds.csv")
    merge_folds(parts, args.out / "all")
    return cli_main(["report", "--results", str(args.out / "all")])


if __name__ == "__main__":
    sys.exit(main())

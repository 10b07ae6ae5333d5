"""Run the acceptance suite and print only the per-criterion summary.

    python scripts/run_acceptance.py [-k EXPR]

Criterion 6 trains tuned boosting on Tic-tac-toe and takes several minutes
on one core; pass ``-k "not criterion_06"`` to skip it.
"""
import argparse
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-k", default=None, help="pytest -k expression")
    args = ap.parse_args()
    argv = [str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    if args.k:
        argv += ["-k", args.k]
    return pytest.main(argv)


if __name__ == "__main__":
    sys.exit(main())

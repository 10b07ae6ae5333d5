from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"

# first calls hit numba compilation, so per-example deadlines are meaningless
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(str(c) for c in r) + "\n")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_blobs(tmp_path):
    """Small, easily separable binary dataset on disk (60 rows)."""
    r = np.random.default_rng(7)
    X0 = r.normal(0.0, 1.0, size=(30, 3))
    X1 = r.normal(2.5, 1.0, size=(30, 3))
    rows = [list(np.round(x, 4)) + ["a"] for x in X0] + [list(np.round(x, 4)) + ["b"] for x in X1]
    order = r.permutation(len(rows))
    return write_csv(tmp_path / "blobs.csv", ["f0", "f1", "f2", "label"], [rows[i] for i in order])


# acceptance criterion number -> (passed, one-line detail); printed at the end
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'} | {detail}")

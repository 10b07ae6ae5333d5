"""Write the public benchmark files used by the acceptance suite into data/.

    python scripts/prepare_datasets.py [--pydataset-tar PATH] [--banknote PATH]

* iris.csv         Fisher's iris (150 x 4, 3 classes), from scikit-learn's bundled copy.
* breast.csv       Wisconsin breast cancer, original 699-row version with 16
                   missing "bare nuclei" cells, from the MASS ``biopsy`` table
                   shipped inside the ``pydataset`` source archive.
* tictactoe.csv    Tic-tac-toe endgame (958 x 9). Regenerated exactly: it is
                   the set of terminal boards reachable when x moves first,
                   labelled positive iff x has three in a row.
* banknote.csv     Banknote authentication (1372 x 4); copied from a local
                   file when one is supplied, since no offline source ships it.
"""
import argparse
import csv
import io
import subprocess
import sys
import tarfile
import tempfile
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "data"

LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]
SQUARES = ["top-left", "top-middle", "top-right", "middle-left", "middle-middle",
           "middle-right", "bottom-left", "bottom-middle", "bottom-right"]


def _wins(board, p):
    return any(all(board[i] == p for i in line) for line in LINES)


def tictactoe_endgames():
    """All terminal boards of games where x moves first.

    Rows are sorted positives first, then square by square with x < o < b.
    The set of boards matches the UCI file; its row order is close to but
    not exactly this one, which only matters for the fold assignment.
    """
    seen = set()

    def play(board, player):
        if _wins(board, "x") or _wins(board, "o") or "b" not in board:
            seen.add(tuple(board))
            return
        for i in range(9):
            if board[i] == "b":
                board[i] = player
                play(board, "o" if player == "x" else "x")
                board[i] = "b"

    play(["b"] * 9, "x")
    rank = {"x": 0, "o": 1, "b": 2}
    rows = [(b, "positive" if _wins(b, "x") else "negative") for b in seen]
    rows.sort(key=lambda r: (r[1] != "positive", [rank[c] for c in r[0]]))
    return rows


def write_tictactoe():
    rows = tictactoe_endgames()
    with open(OUT / "tictactoe.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SQUARES + ["class"])
        for board, label in rows:
            w.writerow(list(board) + [label])
    return len(rows)


def write_iris():
    from sklearn.datasets import load_iris

    ds = load_iris()
    names = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
    with open(OUT / "iris.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["class"])
        for x, t in zip(ds.data, ds.target):
            w.writerow([f"{v:g}" for v in x] + ["Iris-" + ds.target_names[t]])
    return len(ds.target)


def _pydataset_tar(path):
    if path:
        return Path(path)
    tmp = Path(tempfile.mkdtemp())
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "--no-binary", ":all:",
                    "-d", str(tmp), "pydataset==0.2.0"], check=True)
    return next(tmp.glob("pydataset-*.tar.gz"))


def write_breast(tar_path):
    with tarfile.open(_pydataset_tar(tar_path)) as outer:
        inner_member = next(m for m in outer.getmembers() if m.name.endswith("resources.tar.gz"))
        inner = tarfile.open(fileobj=io.BytesIO(outer.extractfile(inner_member).read()))
        text = inner.extractfile("resources/rdata/csv/MASS/biopsy.csv").read().decode()
    reader = csv.reader(io.StringIO(text))
    next(reader)
    names = ["clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
             "marginal_adhesion", "epithelial_cell_size", "bare_nuclei",
             "bland_chromatin", "normal_nucleoli", "mitoses"]
    n = 0
    with open(OUT / "breast.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["class"])
        for row in reader:
            # columns: rowname, sample ID, V1..V9, class; the ID is not a feature
            feats = ["?" if v == "NA" else v for v in row[2:11]]
            w.writerow(feats + [row[11]])
            n += 1
    return n


def write_banknote(path):
    names = ["variance", "skewness", "curtosis", "entropy", "class"]
    with open(path, newline="") as src, open(OUT / "banknote.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        n = 0
        for row in csv.reader(src):
            if not row or not row[0].strip():
                continue
            try:
                float(row[0])
            except ValueError:
                continue  # header line
            w.writerow([c.strip() for c in row[:5]])
            n += 1
    return n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pydataset-tar", help="local pydataset-0.2.0.tar.gz")
    ap.add_argument("--banknote", help="local data_banknote_authentication.txt")
    args = ap.parse_args(argv)
    OUT.mkdir(exist_ok=True)
    print("tictactoe", write_tictactoe())
    print("iris", write_iris())
    print("breast", write_breast(args.pydataset_tar))
    if args.banknote:
        print("banknote", write_banknote(args.banknote))


if __name__ == "__main__":
    main()

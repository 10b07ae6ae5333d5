"""Dataset ingestion, mean imputation, stratified folds and row sampling."""
import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._kernels import subsample_mask
from .seeding import make_rng

MISSING_TOKENS = frozenset({"", "?"})


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


class ImputationError(DataError):
    pass


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    origin: str = "numeric"  # or "categorical"
    imputed_count: int = 0
    categories: tuple = ()
    impute_value: Optional[float] = None


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """Dense numeric feature matrix with class labels.

    ``X`` has shape ``(n_rows, n_features)`` and holds NaN where ``missing``
    is set. ``labels`` are class indices in ``[0, n_classes)``.
    """

    X: np.ndarray
    missing: np.ndarray
    labels: np.ndarray
    n_classes: int
    column_meta: tuple
    class_names: tuple = ()

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def feature_names(self):
        return [m.name for m in self.column_meta]

    def column(self, j):
        return self.X[:, j]

    def take(self, rows) -> "DataMatrix":
        """Row subset sharing column metadata and the class domain."""
        rows = np.asarray(rows, dtype=np.int64)
        return replace(self, X=self.X[rows], missing=self.missing[rows],
                       labels=self.labels[rows])

    def validate(self, require_all_classes=True):
        n = self.n_rows
        if self.missing.shape != self.X.shape or self.labels.shape != (n,):
            raise DataError("column and label lengths disagree")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise DataError("label index out of range")
        if require_all_classes:
            present = np.bincount(self.labels, minlength=self.n_classes)
            if np.any(present == 0):
                raise DataError("every class must occur at least once")
        return self


@dataclass(frozen=True)
class Schema:
    """Column encodings learned at load time, reused to read new files."""

    label_col: str
    feature_names: tuple
    origins: tuple
    categories: tuple
    class_names: tuple

    @classmethod
    def from_data(cls, data: DataMatrix, label_col: str) -> "Schema":
        return cls(label_col=label_col,
                   feature_names=tuple(m.name for m in data.column_meta),
                   origins=tuple(m.origin for m in data.column_meta),
                   categories=tuple(tuple(m.categories) for m in data.column_meta),
                   class_names=tuple(data.class_names))

    def to_dict(self):
        return {"label_col": self.label_col,
                "feature_names": list(self.feature_names),
                "origins": list(self.origins),
                "categories": [list(c) for c in self.categories],
                "class_names": list(self.class_names)}

    @classmethod
    def from_dict(cls, d):
        return cls(label_col=d["label_col"],
                   feature_names=tuple(d["feature_names"]),
                   origins=tuple(d["origins"]),
                   categories=tuple(tuple(c) for c in d["categories"]),
                   class_names=tuple(d["class_names"]))


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, label_col=None, schema=None, require_label=True) -> DataMatrix:
    """Read a comma-separated file with one header row.

    Cells equal to ``"?"`` or empty are missing. Non-numeric feature columns
    and the labels are ordinal-encoded by order of first appearance.

    :param label_col: name of the label column; defaults to the last column.
    :param schema: a :class:`Schema` (or a dict of ``name -> "numeric" |
        "categorical"`` hints). A full Schema fixes the category and class
        encodings, which is how prediction files are read.
    :param require_label: when False a file without the label column is
        accepted and all labels are set to 0.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [[c.strip() for c in r] for r in rows[1:]]
    if not body:
        raise DataError(f"{path}: zero data rows")
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(r)} cells, expected {len(header)}")

    full = schema if isinstance(schema, Schema) else None
    hints = schema if isinstance(schema, dict) else {}
    if label_col is None:
        label_col = full.label_col if full else header[-1]
    has_label = label_col in header
    if not has_label and require_label:
        raise DataError(f"{path}: label column {label_col!r} not found")
    label_idx = header.index(label_col) if has_label else None

    feat_idx = [j for j in range(len(header)) if j != label_idx]
    if full is not None:
        missing_cols = [n for n in full.feature_names if n not in header]
        if missing_cols:
            raise DataError(f"{path}: missing feature columns {missing_cols}")
        feat_idx = [header.index(n) for n in full.feature_names]

    n = len(body)
    X = np.full((n, len(feat_idx)), np.nan)
    missing = np.zeros((n, len(feat_idx)), dtype=bool)
    metas = []
    for out_j, j in enumerate(feat_idx):
        cells = [r[j] for r in body]
        is_missing = np.array([c in MISSING_TOKENS for c in cells])
        missing[:, out_j] = is_missing
        present = [c for c in cells if c not in MISSING_TOKENS]
        if full is not None:
            origin = full.origins[out_j]
            cats = list(full.categories[out_j])
        else:
            origin = hints.get(header[j])
            if origin is None:
                origin = "numeric" if all(_is_number(c) for c in present) else "categorical"
            cats = []
        if origin == "numeric":
            for i, c in enumerate(cells):
                if not is_missing[i]:
                    try:
                        X[i, out_j] = float(c)
                    except ValueError as exc:
                        raise DataError(f"{path}: non-numeric value {c!r} in column {header[j]!r}") from exc
        else:
            lookup = {c: k for k, c in enumerate(cats)}
            for i, c in enumerate(cells):
                if is_missing[i]:
                    continue
                if c not in lookup:
                    if full is not None:
                        # unseen category at prediction time: treat as missing
                        missing[i, out_j] = True
                        continue
                    lookup[c] = len(cats)
                    cats.append(c)
                X[i, out_j] = lookup[c]
        metas.append(ColumnMeta(name=header[j], origin=origin, categories=tuple(cats)))

    if has_label:
        raw = [r[label_idx] for r in body]
        if all(c in MISSING_TOKENS for c in raw):
            raise DataError(f"{path}: label column {label_col!r} is entirely missing")
        bad = [i + 2 for i, c in enumerate(raw) if c in MISSING_TOKENS]
        if bad:
            raise DataError(f"{path}: missing label on line(s) {bad[:5]}")
        classes = list(full.class_names) if full else []
        lookup = {c: k for k, c in enumerate(classes)}
        labels = np.empty(n, dtype=np.int64)
        for i, c in enumerate(raw):
            if c not in lookup:
                if full is not None:
                    raise DataError(f"{path}: unknown class {c!r}")
                lookup[c] = len(classes)
                classes.append(c)
            labels[i] = lookup[c]
    else:
        classes = list(full.class_names) if full else ["0"]
        labels = np.zeros(n, dtype=np.int64)

    data = DataMatrix(X=np.asfortranarray(X), missing=missing, labels=labels,
                      n_classes=len(classes), column_meta=tuple(metas),
                      class_names=tuple(classes))
    return data.validate(require_all_classes=full is None and has_label)


def column_means(data: DataMatrix, stats_rows) -> np.ndarray:
    """Mean of the non-missing values of each column over ``stats_rows``.

    Columns without any missing value anywhere get NaN (nothing to impute).
    """
    rows = np.asarray(getattr(stats_rows, "rows", stats_rows), dtype=np.int64)
    if rows.size == 0:
        raise ImputationError("stats_rows is empty")
    means = np.full(data.n_features, np.nan)
    for j in np.flatnonzero(data.missing.any(axis=0)):
        sub = data.X[rows, j]
        ok = ~data.missing[rows, j]
        if not ok.any():
            raise ImputationError(
                f"column {data.column_meta[j].name!r} has no observed value in the statistics rows")
        means[j] = sub[ok].mean()
    return means


def fill_missing(data: DataMatrix, means) -> DataMatrix:
    """Replace missing cells with the given per-column values."""
    if not data.missing.any():
        return data
    X = np.array(data.X, order="F")
    metas = list(data.column_meta)
    for j in np.flatnonzero(data.missing.any(axis=0)):
        if np.isnan(means[j]):
            raise ImputationError(f"no imputation value for column {metas[j].name!r}")
        m = data.missing[:, j]
        X[m, j] = means[j]
        metas[j] = replace(metas[j], imputed_count=metas[j].imputed_count + int(m.sum()),
                           impute_value=float(means[j]))
    return replace(data, X=X, missing=np.zeros_like(data.missing), column_meta=tuple(metas))


def impute_mean(data: DataMatrix, stats_rows=None) -> DataMatrix:
    """Fill each missing cell with its column mean over ``stats_rows``.

    ``stats_rows`` defaults to every row; pass the training rows of a fold to
    keep test rows out of the statistics.
    """
    if stats_rows is None:
        stats_rows = np.arange(data.n_rows)
    return fill_missing(data, column_means(data, stats_rows))


@dataclass(frozen=True, eq=False)
class SampleIndex:
    rows: np.ndarray
    replacement: bool
    source_size: int

    def weights(self) -> np.ndarray:
        """Multiplicity of each source row in the sample."""
        return np.bincount(self.rows, minlength=self.source_size).astype(np.float64)


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int = 0

    def test_rows(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def splits(self):
        for f in range(self.k):
            yield self.train_rows(f), self.test_rows(f)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "seed": self.seed,
                           "assignments": [int(a) for a in self.assignments]})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(k=d["k"], assignments=np.asarray(d["assignments"], dtype=np.int64), seed=d["seed"])


def stratified_kfold(labels, k: int, seed=0) -> FoldPlan:
    """Seeded per-class shuffle followed by round-robin fold assignment.

    The round-robin counter carries over from one class to the next, so fold
    sizes differ by at most one in addition to the per-class bound.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if k < 2:
        raise DataError("k must be at least 2")
    if k > n:
        raise DataError(f"cannot build {k} folds from {n} rows")
    rng = make_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        assignments[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def bootstrap_sample(n: int, seed=0) -> SampleIndex:
    if n < 1:
        raise DataError("bootstrap needs n >= 1")
    rows = make_rng(seed).integers(0, n, size=n)
    return SampleIndex(rows=rows, replacement=True, source_size=n)


def subsample_size(n: int, fraction: float) -> int:
    # round() guards against 0.7 * 10 == 7.000000000000001
    return math.ceil(round(fraction * n, 9))


def subsample_without_replacement(n: int, fraction: float, seed=0) -> SampleIndex:
    """``ceil(fraction * n)`` distinct rows drawn uniformly, in ascending order."""
    if not 0 < fraction <= 1:
        raise DataError(f"fraction must be in (0, 1], got {fraction}")
    m = subsample_size(n, fraction)
    if m < 1:
        raise DataError("subsample would be empty")
    if m >= n:
        rows = np.arange(n)
    else:
        rows = np.flatnonzero(subsample_mask(int(seed) & 0x7FFFFFFFFFFFFFFF, n, m))
    return SampleIndex(rows=rows, replacement=False, source_size=n)

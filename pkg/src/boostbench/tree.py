"""Single-tree induction on pre-sorted columns.

Three growth criteria share one scanner: second-order (Newton) splitting with
an L2 leaf penalty and a minimum-gain threshold, variance reduction for
fitting residuals, and Gini impurity for classification forests.
"""
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .data import DataMatrix, SampleIndex

UNLIMITED_DEPTH = 2**31 - 1
CRITERIA = {"newton": K.NEWTON, "variance": K.VARIANCE, "gini": K.GINI}

TREE_FORMAT_VERSION = 1


def n_features_for(rule, n_features: int) -> int:
    """Number of features a rule selects out of ``n_features``.

    ``"sqrt"`` gives floor(sqrt(d)), ``"log2"`` gives floor(log2(d)) + 1,
    ``"all"``/None gives d and a float f gives floor(f * d); always at least 1.
    """
    d = n_features
    if rule is None or rule == "all":
        k = d
    elif rule == "sqrt":
        k = int(math.isqrt(d))
    elif rule == "log2":
        k = int(math.floor(math.log2(d))) + 1 if d > 0 else 0
    elif isinstance(rule, str):
        raise ValueError(f"unknown feature rule {rule!r}")
    else:
        frac = float(rule)
        if not 0 < frac <= 1:
            raise ValueError(f"feature fraction must be in (0, 1], got {frac}")
        k = int(math.floor(round(frac * d, 9)))
    return max(1, min(d, k))


@dataclass(frozen=True)
class TreeGrowthParams:
    max_depth: Optional[int] = None  # None: unlimited
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    gamma: float = 0.0
    reg_lambda: float = 1.0
    # newton only: each child needs a hessian sum of at least this much
    min_child_weight: float = 0.0
    features_per_split: Union[str, float, None] = "all"
    feature_sampling: str = "node"  # "node" or "level"
    split_mode: str = "exact"  # "exact" or "percentile"
    n_bins: int = 256

    def __post_init__(self):
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.gamma < 0 or self.reg_lambda < 0 or self.min_child_weight < 0:
            raise ValueError("gamma, lambda and min_child_weight must be non-negative")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.split_mode not in ("exact", "percentile"):
            raise ValueError(f"unknown split_mode {self.split_mode!r}")
        if self.split_mode == "percentile" and self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.feature_sampling not in ("node", "level"):
            raise ValueError(f"unknown feature_sampling {self.feature_sampling!r}")

    @property
    def depth_limit(self) -> int:
        return UNLIMITED_DEPTH if self.max_depth is None else int(self.max_depth)


# features with at most this many distinct values are split from per-node
# histograms in level-wise growth; others are scanned in sort order
HIST_MAX_BINS = 64


@dataclass(frozen=True, eq=False)
class SortedColumns:
    """Per-feature row permutations sorting each column ascending.

    Ties keep row order, so a constant column maps to ``0..n-1``. ``codes``
    holds each value's rank among the column's distinct values, which are
    listed in ``uniques`` (padded with +inf up to the widest column).
    """

    perm: np.ndarray  # (n_features, n_rows)
    values: np.ndarray  # (n_rows, n_features)
    codes: np.ndarray  # (n_rows, n_features)
    uniques: np.ndarray  # (n_features, max distinct)
    n_unique: np.ndarray  # (n_features,)

    def restrict(self, weights) -> np.ndarray:
        """Sorted row lists keeping only rows with positive weight."""
        keep = weights[self.perm] > 0
        m = int(keep[0].sum()) if self.perm.shape[0] else 0
        return np.ascontiguousarray(self.perm[keep].reshape(self.perm.shape[0], m))


def build_sorted_columns(data) -> SortedColumns:
    X = data.X if isinstance(data, DataMatrix) else np.asarray(data, dtype=np.float64)
    if isinstance(data, DataMatrix) and data.missing.any():
        raise ValueError("impute missing values before sorting columns")
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    if np.isnan(X).any():
        raise ValueError("feature matrix contains NaN")
    n, d = X.shape
    perm = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T, dtype=np.int64)
    codes = np.empty((n, d), dtype=np.int64)
    per = []
    for f in range(d):
        u, inv = np.unique(X[:, f], return_inverse=True)
        codes[:, f] = inv.reshape(-1)
        per.append(u)
    n_unique = np.array([u.size for u in per], dtype=np.int64)
    uniques = np.full((d, max(1, int(n_unique.max(initial=1)))), np.inf)
    for f, u in enumerate(per):
        uniques[f, :u.size] = u
    return SortedColumns(perm=perm, values=X, codes=codes, uniques=uniques, n_unique=n_unique)


@dataclass(frozen=True)
class GradPair:
    g: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    gain: float
    left_count: float
    right_count: float


def split_gain_newton(G_L, H_L, G_R, H_R, reg_lambda, gamma) -> float:
    """Loss reduction of a split under the regularized second-order objective.

    ``0.5 * [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)] - gamma``; any
    zero denominator yields ``-gamma``. Accept the split only if the result is
    strictly positive.
    """
    return float(K.newton_gain(float(G_L), float(H_L), float(G_R), float(H_R),
                               float(reg_lambda), float(gamma)))


def leaf_weight_newton(G, H, reg_lambda) -> float:
    """Minimizer ``-G/(H+lam)`` of ``G*w + 0.5*(H+lam)*w**2``."""
    denom = H + reg_lambda
    if not denom > 0:
        raise ValueError("H + lambda must be positive")
    return -G / denom


def _cuts_for(X, weights, n_bins):
    """Candidate thresholds per feature from unweighted sample quantiles.

    With at most ``n_bins`` distinct values every gap is a candidate.
    """
    rows = np.flatnonzero(weights > 0)
    d = X.shape[1]
    per = []
    for f in range(d):
        v = np.sort(X[rows, f])
        u = np.unique(v)
        if u.size <= 1:
            per.append(np.empty(0))
            continue
        mids = 0.5 * (u[:-1] + u[1:])
        if u.size <= n_bins:
            per.append(mids)
            continue
        m = v.size
        pos = np.ceil(np.arange(1, n_bins) * m / n_bins).astype(np.int64)
        pos = np.clip(pos, 1, m - 1)
        # gap just after the value at pos-1, i.e. between it and the next distinct value
        gap = np.searchsorted(u, v[pos - 1], side="left")
        gap = np.unique(gap[gap < u.size - 1])
        per.append(mids[gap])
    width = max(1, max(c.size for c in per))
    cuts = np.full((d, width), np.inf)
    n_cuts = np.zeros(d, dtype=np.int64)
    for f, c in enumerate(per):
        cuts[f, :c.size] = c
        n_cuts[f] = c.size
    return cuts, n_cuts


_NO_CUTS = (np.full((1, 1), np.inf), np.zeros(1, dtype=np.int64))


def _prepare_stats(target, criterion, n_classes):
    if criterion == "newton":
        if not isinstance(target, GradPair):
            raise TypeError("newton growth needs a GradPair target")
        return np.column_stack([target.g, target.h]).astype(np.float64), 2
    if criterion == "variance":
        r = np.asarray(target, dtype=np.float64)
        return r.reshape(-1, 1).copy(), 1
    y = np.asarray(target, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    onehot = np.zeros((y.shape[0], n_classes))
    onehot[np.arange(y.shape[0]), y] = 1.0
    return onehot, n_classes


class Tree:
    """Binary decision tree stored as flat node arrays.

    ``feature[i] == -1`` marks a leaf. ``value[i]`` is the payload: a
    one-element weight for regression-style trees, or a class histogram.
    Rows go left when ``x[feature] <= threshold``.
    """

    def __init__(self, feature, threshold, left, right, value, n_samples, n_features,
                 depth=None, criterion="newton"):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)
        if self.value.ndim == 1:
            self.value = self.value.reshape(-1, 1)
        self.n_samples = np.asarray(n_samples, dtype=np.float64)
        self.n_features = int(n_features)
        self.criterion = criterion
        if depth is None:
            depth = self._depths()
        self.depth = np.asarray(depth, dtype=np.int64)

    def _depths(self):
        depth = np.zeros(self.feature.shape[0], dtype=np.int64)
        for i in range(self.feature.shape[0]):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        return depth

    @classmethod
    def leaf(cls, payload, n_features, criterion="newton"):
        payload = np.atleast_1d(np.asarray(payload, dtype=np.float64))
        return cls([-1], [0.0], [-1], [-1], payload.reshape(1, -1), [0.0], n_features,
                   criterion=criterion)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    @property
    def is_leaf(self):
        return self.feature < 0

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def apply(self, X) -> np.ndarray:
        X = self._check(X)
        return K.apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def predict(self, X) -> np.ndarray:
        """Leaf payload per row, shape ``(n_rows, payload_size)``."""
        return self.value[self.apply(X)]

    def to_dict(self, node=0):
        """Nested ``{feature, threshold, left, right}`` / ``{leaf: payload}`` form."""
        if self.feature[node] < 0:
            return {"leaf": [float(v) for v in self.value[node]],
                    "n": float(self.n_samples[node])}
        return {"feature": int(self.feature[node]),
                "threshold": float(self.threshold[node]),
                "n": float(self.n_samples[node]),
                "left": self.to_dict(int(self.left[node])),
                "right": self.to_dict(int(self.right[node]))}

    @classmethod
    def from_dict(cls, d, n_features, criterion="newton"):
        feature, threshold, left, right, value, n = [], [], [], [], [], []

        def visit(node):
            i = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(None)
            n.append(node.get("n", 0.0))
            if "leaf" in node:
                value[i] = node["leaf"]
            else:
                feature[i] = node["feature"]
                threshold[i] = node["threshold"]
                left[i] = visit(node["left"])
                right[i] = visit(node["right"])
            return i

        visit(d)
        width = max(len(v) for v in value if v is not None)
        vals = np.zeros((len(value), width))
        for i, v in enumerate(value):
            if v is not None:
                vals[i] = v
        return cls(feature, threshold, left, right, vals, n, n_features, criterion=criterion)


def predict_tree(tree: Tree, row):
    """Payload of the leaf reached by a single feature vector."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != tree.n_features:
        raise ValueError(f"expected {tree.n_features} features, got {row.shape}")
    return tree.predict(row.reshape(1, -1))[0]


def _as_weights(rows, n):
    if rows is None:
        return np.ones(n)
    if isinstance(rows, SampleIndex):
        return rows.weights()
    rows = np.asarray(rows)
    if rows.dtype == bool or np.issubdtype(rows.dtype, np.floating):
        if rows.shape != (n,):
            raise ValueError("a weight vector needs one entry per row")
        return rows.astype(np.float64)
    return np.bincount(rows.astype(np.int64), minlength=n).astype(np.float64)


def _node_search_inputs(node_rows, sorted_cols, stats):
    n = sorted_cols.values.shape[0]
    w = _as_weights(node_rows, n)
    work = sorted_cols.restrict(w)
    return w, work, np.ascontiguousarray(stats * w[:, None])


def _best_split(node_rows, target, sorted_cols, params, feature_subset, criterion,
                use_cuts, n_classes=None):
    stats, n_gain = _prepare_stats(target, criterion, n_classes)
    w, work, stats = _node_search_inputs(node_rows, sorted_cols, stats)
    X = sorted_cols.values
    if feature_subset is None:
        feature_subset = np.arange(X.shape[1])
    feats = np.asarray(sorted(int(f) for f in feature_subset), dtype=np.int64)
    if use_cuts:
        cuts, n_cuts = _cuts_for(X, w, params.n_bins)
    else:
        cuts, n_cuts = _NO_CUTS
    if work.shape[1] < 2 or w.sum() < params.min_samples_split:
        return None
    f, thr, gain, nl = K.best_split(X, work, 0, work.shape[1], feats, w, stats, n_gain,
                                    CRITERIA[criterion], float(params.reg_lambda),
                                    float(params.gamma), float(params.min_samples_leaf),
                                    float(params.min_child_weight), use_cuts, cuts, n_cuts, False, feats.size)
    if f < 0:
        return None
    if criterion != "gini" and not gain > 0:
        return None
    goes_left = X[:, f] <= thr
    return SplitCandidate(feature=int(f), threshold=float(thr), gain=float(gain),
                          left_count=float(w[goes_left].sum()),
                          right_count=float(w[~goes_left].sum()))


def best_split_exact(node_rows, grads: GradPair, sorted_cols: SortedColumns,
                     params: TreeGrowthParams, feature_subset=None,
                     criterion="newton") -> Optional[SplitCandidate]:
    """Highest-gain split of a node by a linear scan of each sorted feature.

    Thresholds sit midway between adjacent distinct values. Returns None
    when no admissible split has positive gain.
    """
    return _best_split(node_rows, grads, sorted_cols, params, feature_subset, criterion, False)


def best_split_percentile(node_rows, grads: GradPair, sorted_cols: SortedColumns,
                          params: TreeGrowthParams, feature_subset=None,
                          criterion="newton") -> Optional[SplitCandidate]:
    """Like :func:`best_split_exact` but only gaps straddling one of the
    ``n_bins - 1`` sample-quantile boundaries of a feature are tried."""
    return _best_split(node_rows, grads, sorted_cols, params, feature_subset, criterion, True)


def grow_tree(data, rows, target, params: TreeGrowthParams, criterion="newton",
              seed=0, sorted_cols: Optional[SortedColumns] = None,
              n_classes: Optional[int] = None, algorithm: str = "auto",
              hist_max: int = HIST_MAX_BINS) -> Tree:
    """Grow one tree on the rows of ``data`` selected by ``rows``.

    :param data: DataMatrix or 2-D array with no missing values.
    :param rows: SampleIndex, integer index array (repeats count as weight),
        boolean mask, float weight vector, or None for all rows.
    :param target: GradPair (newton), residual vector (variance) or class
        labels (gini), indexed by source row.
    :param criterion: ``"newton"``, ``"variance"`` or ``"gini"``.
    :param sorted_cols: reuse a precomputed :class:`SortedColumns`.
    :param algorithm: ``"depthfirst"`` partitions the sorted row lists node
        by node; ``"levelwise"`` scans the global sort order once per level
        and only supports per-level feature draws. ``"auto"`` picks
        level-wise whenever it applies. Both give the same tree up to float
        summation order.
    :param hist_max: level-wise only; features with at most this many
        distinct values are split from per-node histograms.

    Leaf payloads are the Newton weight ``-G/(H+lam)``, the mean target, or
    the class histogram of sample counts.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    if sorted_cols is None:
        sorted_cols = build_sorted_columns(data)
    X = sorted_cols.values
    n, d = X.shape
    w = _as_weights(rows, n)
    if not w.sum() > 0:
        raise ValueError("rows must select at least one row")
    stats, n_gain = _prepare_stats(target, criterion, n_classes)
    stats = np.ascontiguousarray(stats * w[:, None])
    return _grow_weighted(sorted_cols, w, stats, n_gain, params, criterion, seed,
                          algorithm, hist_max)[0]


def _grow_weighted(sorted_cols, w, stats, n_gain, params, criterion, seed,
                   algorithm="auto", hist_max=HIST_MAX_BINS):
    """Kernel dispatch; ``stats`` already carries the row weights.

    Returns the tree and the leaf index of every row of ``sorted_cols``.
    """
    X = sorted_cols.values
    d = X.shape[1]
    use_cuts = params.split_mode == "percentile"
    cuts, n_cuts = _cuts_for(X, w, params.n_bins) if use_cuts else _NO_CUTS
    n_draw = n_features_for(params.features_per_split, d)
    seed = int(seed) & 0x7FFFFFFFFFFFFFFF
    common = (n_gain, CRITERIA[criterion], float(params.reg_lambda), float(params.gamma),
              params.depth_limit, float(params.min_samples_split),
              float(params.min_samples_leaf), float(params.min_child_weight), n_draw)
    if algorithm == "auto":
        # drawing every feature at every node is the same as drawing per level
        algorithm = "levelwise" if params.feature_sampling == "level" or n_draw == d else "depthfirst"
    if algorithm == "levelwise":
        if params.feature_sampling == "node" and n_draw < d:
            raise ValueError("level-wise growth cannot sample features per node")
        *out, leaf_ids = K.grow_levelwise(X, sorted_cols.perm, sorted_cols.codes,
                                          sorted_cols.uniques, sorted_cols.n_unique, hist_max,
                                          w, stats, *common, seed, use_cuts, cuts, n_cuts)
    elif algorithm == "depthfirst":
        order = sorted_cols.restrict(w)
        out = K.grow(X, order, w, stats, *common, params.feature_sampling == "level",
                     params.feature_sampling == "node", seed, use_cuts, cuts, n_cuts)
        leaf_ids = None
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    feature, threshold, left, right, node_stats, node_weight, _gain, depth = out
    if criterion == "newton":
        denom = node_stats[:, 1] + params.reg_lambda
        value = np.zeros(denom.shape[0])
        ok = denom > 0
        value[ok] = -node_stats[ok, 0] / denom[ok]
    elif criterion == "variance":
        value = node_stats[:, 0] / node_weight
    else:
        value = node_stats
    tree = Tree(feature, threshold, left, right, value, node_weight, d, depth=depth,
                criterion=criterion)
    if leaf_ids is None:
        leaf_ids = tree.apply(X)
    return tree, leaf_ids

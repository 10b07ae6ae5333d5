"""Additive tree ensembles: classic gradient boosting and regularized
second-order boosting.

``mode="gb"`` fits variance-reduction trees to pseudo-residuals and replaces
every leaf with a one-step Newton line-search value. ``mode="xgb"`` grows
trees directly on gradient/hessian pairs with the gamma/lambda penalties and
per-level column sampling. Both shrink each step by ``learning_rate``.
"""
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from ._kernels import stream_seed, subsample_mask
from .data import DataMatrix, subsample_size
from .losses import BinaryLogistic, LossSpec, Softmax, SquaredLoss, loss_for_classes
from .seeding import derive_seed
from .tree import SortedColumns, Tree, TreeGrowthParams, _grow_weighted, build_sorted_columns

_DENOM_FLOOR = 1e-150


@dataclass(frozen=True)
class BoostParams:
    n_trees: int = 200
    learning_rate: float = 0.1
    max_depth: Optional[int] = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: Union[str, float, None] = 1.0
    subsample: float = 1.0
    mode: str = "gb"
    gamma: float = 0.0
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    colsample_bylevel: Union[str, float, None] = 1.0
    split_mode: str = "exact"
    n_bins: int = 256
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0 < self.subsample <= 1:
            raise ValueError("subsample must be in (0, 1]")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        if self.mode not in ("gb", "xgb"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def growth_params(self) -> TreeGrowthParams:
        if self.mode == "gb":
            return TreeGrowthParams(max_depth=self.max_depth,
                                    min_samples_split=self.min_samples_split,
                                    min_samples_leaf=self.min_samples_leaf,
                                    features_per_split=self.max_features,
                                    feature_sampling="node",
                                    split_mode=self.split_mode, n_bins=self.n_bins)
        return TreeGrowthParams(max_depth=self.max_depth,
                                min_samples_split=self.min_samples_split,
                                min_samples_leaf=self.min_samples_leaf,
                                gamma=self.gamma, reg_lambda=self.reg_lambda,
                                min_child_weight=self.min_child_weight,
                                features_per_split=self.colsample_bylevel,
                                feature_sampling="level",
                                split_mode=self.split_mode, n_bins=self.n_bins)


@dataclass(eq=False)
class BoostedEnsemble:
    """Trained additive model.

    ``trees[m][k]`` is the tree for output ``k`` at iteration ``m``; the
    margin is ``base_score + learning_rate * sum of tree outputs``.
    """

    base_score: np.ndarray
    trees: list
    learning_rate: float
    loss: LossSpec
    n_features: int
    mode: str = "gb"
    n_classes: int = 2
    train_loss: list = field(default_factory=list)

    @property
    def n_outputs(self) -> int:
        return self.base_score.shape[0]

    @property
    def tree_count(self) -> int:
        return sum(len(t) for t in self.trees)

    def _check(self, X):
        X = np.asarray(X.X if isinstance(X, DataMatrix) else X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return np.ascontiguousarray(X)

    def predict_margin(self, X) -> np.ndarray:
        X = self._check(X)
        acc = np.zeros((X.shape[0], self.n_outputs))
        for step in self.trees:
            for k, tree in enumerate(step):
                acc[:, k] += tree.predict(X)[:, 0]
        F = self.base_score[None, :] + self.learning_rate * acc
        return F[:, 0] if self.n_outputs == 1 else F

    def predict_proba(self, X) -> np.ndarray:
        if not hasattr(self.loss, "proba"):
            raise TypeError(f"{self.loss!r} has no probability mapping")
        return self.loss.proba(self.predict_margin(X))

    def predict_class(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest class index on ties
        return np.argmax(self.predict_proba(X), axis=1)

    def predict(self, X):
        if isinstance(self.loss, SquaredLoss):
            return self.predict_margin(X)
        return self.predict_class(X)


def _resolve_inputs(data, y, loss):
    if isinstance(data, DataMatrix):
        if data.missing.any():
            raise ValueError("impute missing values before fitting")
        X = data.X
        n_classes = data.n_classes
        if y is None:
            y = data.labels
    else:
        X = data
        if y is None:
            raise ValueError("y is required when data is an array")
        n_classes = None
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if loss is None:
        if n_classes is None:
            n_classes = int(y.max()) + 1
        loss = loss_for_classes(max(n_classes, 2))
    if isinstance(loss, Softmax):
        n_classes = loss.n_classes
    elif isinstance(loss, BinaryLogistic):
        n_classes = 2
    else:
        n_classes = 0
    return X, y, loss, n_classes


def _as_2d(a):
    return a.reshape(-1, 1) if a.ndim == 1 else a


def _line_search_value(loss, y, F, r, leaf_ids, weights, n_nodes, k):
    """Per-leaf one-step Newton value sum(r) / sum(curvature)."""
    if isinstance(loss, SquaredLoss):
        den_terms = np.ones_like(r)
        scale = 1.0
    elif isinstance(loss, BinaryLogistic):
        p = y - r  # r = y - p
        den_terms = p * (1.0 - p)
        scale = 1.0
    else:
        a = np.abs(r)
        den_terms = a * (1.0 - a)
        scale = (loss.n_classes - 1) / loss.n_classes
    num = np.bincount(leaf_ids, weights=r * weights, minlength=n_nodes)
    den = np.bincount(leaf_ids, weights=den_terms * weights, minlength=n_nodes)
    safe = np.abs(den) >= _DENOM_FLOOR
    out = np.zeros(n_nodes)
    out[safe] = scale * num[safe] / den[safe]
    return out


def _fit(data, params: BoostParams, y=None, loss=None, sorted_cols=None,
         track_loss=False) -> BoostedEnsemble:
    X, y, loss, n_classes = _resolve_inputs(data, y, loss)
    n, d = X.shape
    if sorted_cols is None:
        sorted_cols = build_sorted_columns(X)
    base = loss.init_constant(y)
    n_out = base.shape[0]
    F = np.tile(base, (n, 1))
    y_float = np.asarray(y, dtype=float)
    targets = loss._onehot(y) if isinstance(loss, Softmax) else y_float.reshape(-1, 1)
    gp = params.growth_params()
    ens = BoostedEnsemble(base_score=base, trees=[], learning_rate=params.learning_rate,
                          loss=loss, n_features=d, mode=params.mode,
                          n_classes=n_classes)
    criterion = "variance" if params.mode == "gb" else "newton"
    # one derived seed per stream; per-iteration seeds are cheap keyed children
    sub_seed = derive_seed(params.seed, "subsample")
    tree_seed = derive_seed(params.seed, "tree")
    n_sub = subsample_size(n, params.subsample)
    full = np.ones(n)
    zero_step = None
    lr = params.learning_rate
    y_arg = y if isinstance(loss, Softmax) else y_float

    def margins():
        return F[:, 0] if n_out == 1 else F

    for m in range(params.n_trees):
        w = full if n_sub >= n else subsample_mask(stream_seed(sub_seed, m), n, n_sub)
        if params.mode == "gb":
            grad = loss.gradient(y_arg, margins())
            hess = None
        else:
            grad, hess = loss.grad_hess(y_arg, margins())
        grad = _as_2d(grad)
        if params.mode == "gb" and not np.any(grad):
            # residuals vanished: keep the tree count with zero-weight roots
            if zero_step is None:
                zero_step = [Tree.leaf(0.0, d, criterion) for _ in range(n_out)]
            ens.trees.append(zero_step)
            if track_loss:
                ens.train_loss.append(float(np.mean(loss.value(y_arg, margins()))))
            continue
        if hess is not None:
            hess = _as_2d(hess)
        step = []
        for k in range(n_out):
            key = stream_seed(tree_seed, m * n_out + k)
            if params.mode == "gb":
                r = -grad[:, k]
                stats = (r * w).reshape(-1, 1)
                tree, leaf_ids = _grow_weighted(sorted_cols, w, stats, 1, gp, "variance", key)
                in_bag = w > 0
                tree.value = _line_search_value(
                    loss, targets[in_bag, k], F[in_bag, k], r[in_bag], leaf_ids[in_bag],
                    w[in_bag], tree.n_nodes, k).reshape(-1, 1)
            else:
                stats = np.empty((n, 2))
                np.multiply(grad[:, k], w, out=stats[:, 0])
                np.multiply(hess[:, k], w, out=stats[:, 1])
                tree, leaf_ids = _grow_weighted(sorted_cols, w, stats, 2, gp, "newton", key)
            step.append(tree)
            F[:, k] += lr * tree.value[leaf_ids, 0]
        ens.trees.append(step)
        if track_loss:
            ens.train_loss.append(float(np.mean(loss.value(y_arg, margins()))))
    return ens


def fit_gb(data, params: Optional[BoostParams] = None, *, y=None, loss=None,
           sorted_cols: Optional[SortedColumns] = None, track_loss=False) -> BoostedEnsemble:
    """Classic gradient boosting with per-leaf Newton line search.

    :param data: imputed DataMatrix, or a 2-D array together with ``y``.
    :param loss: defaults to binary logistic for two classes, softmax otherwise.
    :param track_loss: record the mean training loss after every iteration
        in ``train_loss``.
    """
    params = params or BoostParams(mode="gb")
    if params.mode != "gb":
        params = BoostParams(**{**asdict(params), "mode": "gb"})
    return _fit(data, params, y=y, loss=loss, sorted_cols=sorted_cols, track_loss=track_loss)


def fit_xgb(data, params: Optional[BoostParams] = None, *, y=None, loss=None,
            sorted_cols: Optional[SortedColumns] = None, track_loss=False) -> BoostedEnsemble:
    """Second-order boosting with gamma/lambda regularized Newton trees."""
    params = params or BoostParams(mode="xgb")
    if params.mode != "xgb":
        params = BoostParams(**{**asdict(params), "mode": "xgb"})
    return _fit(data, params, y=y, loss=loss, sorted_cols=sorted_cols, track_loss=track_loss)


def predict_margin(ensemble: BoostedEnsemble, rows):
    return ensemble.predict_margin(rows)


def predict_proba(ensemble: BoostedEnsemble, rows):
    return ensemble.predict_proba(rows)


def predict_class(ensemble: BoostedEnsemble, rows):
    return ensemble.predict_class(rows)

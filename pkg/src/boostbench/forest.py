"""Random forests: bagged Gini trees with per-node feature sampling and hard
majority voting."""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .data import DataMatrix, bootstrap_sample
from .seeding import derive_seed
from .tree import SortedColumns, TreeGrowthParams, _grow_weighted, build_sorted_columns


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: Union[str, float, None] = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("a forest needs at least one tree")

    def growth_params(self) -> TreeGrowthParams:
        return TreeGrowthParams(max_depth=self.max_depth,
                                min_samples_split=self.min_samples_split,
                                min_samples_leaf=self.min_samples_leaf,
                                features_per_split=self.max_features,
                                feature_sampling="node")


@dataclass(eq=False)
class Forest:
    """Ensemble of class-histogram trees.

    Each tree votes for the majority class of the leaf a row lands in (the
    lowest class index on a tied histogram); the forest returns the modal vote.
    """

    trees: list
    n_classes: int
    n_features: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check(self, X):
        X = np.asarray(X.X if isinstance(X, DataMatrix) else X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def votes(self, X) -> np.ndarray:
        """Vote counts, shape ``(n_rows, n_classes)``."""
        X = self._check(X)
        counts = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            leaf_class = np.argmax(tree.value, axis=1)
            counts[rows, leaf_class[tree.apply(X)]] += 1
        return counts

    def predict_proba(self, X) -> np.ndarray:
        """Vote shares; they sum to one per row."""
        return self.votes(X) / float(self.n_trees)

    def predict(self, X) -> np.ndarray:
        # argmax picks the lowest class index among tied vote counts
        return np.argmax(self.votes(X), axis=1)


def fit_forest(data, params: Optional[ForestParams] = None, *, y=None, n_classes=None,
               sorted_cols: Optional[SortedColumns] = None) -> Forest:
    """Grow ``params.n_trees`` Gini trees, each on its own bootstrap sample.

    Tree ``t`` draws its bootstrap rows and feature subsets from seeds keyed
    by ``(params.seed, t)``, so trees are independent of fitting order.

    :param data: imputed DataMatrix, or a 2-D array together with ``y``.
    """
    params = params or ForestParams()
    if isinstance(data, DataMatrix):
        if data.missing.any():
            raise ValueError("impute missing values before fitting")
        X = data.X
        y = data.labels if y is None else y
        n_classes = n_classes or data.n_classes
    elif y is None:
        raise ValueError("y is required when data is an array")
    else:
        X = data
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if sorted_cols is None:
        sorted_cols = build_sorted_columns(X)
    n = X.shape[0]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    gp = params.growth_params()
    trees = []
    for t in range(params.n_trees):
        w = bootstrap_sample(n, seed=derive_seed(params.seed, "bootstrap", t)).weights()
        stats = onehot * w[:, None]
        tree, _ = _grow_weighted(sorted_cols, w, stats, n_classes, gp, "gini",
                                 derive_seed(params.seed, "features", t))
        trees.append(tree)
    return Forest(trees=trees, n_classes=n_classes, n_features=X.shape[1])


def predict_majority(forest: Forest, rows) -> np.ndarray:
    return forest.predict(rows)

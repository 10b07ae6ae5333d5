"""Cross-validated evaluation protocol.

For every outer stratified fold: impute, tune on the training part by an
inner stratified k-fold grid search (or use a fixed config), refit the winner
on the whole training part and score it on the held-out part. Optionally
every grid config is also refitted and scored on the held-out part, which is
what the transition-matrix analysis consumes.

Every random draw is keyed by (master seed, purpose, dataset, method, fold,
...) and never by config or execution order, so results do not depend on how
work is split across processes.
"""
import functools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .boosting import BoostedEnsemble, fit_gb, fit_xgb
from .data import DataError, DataMatrix, FoldPlan, impute_mean, load_csv, stratified_kfold
from .forest import Forest, fit_forest
from .grids import DEFAULTS, N_TREES, ParamGrid, expand_grid, get_grid, make_params
from .seeding import derive_seed
from .tree import build_sorted_columns

INNER_RETRIES = 10


class TuningError(RuntimeError):
    """Inner folds could not be built with every class in every training part."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One (dataset, method, tuning mode) evaluation.

    ``grid`` is a preset name or a ParamGrid; None evaluates the fixed
    ``config`` (layered over the method's defaults) without any search.
    """

    dataset: str
    path: str
    method: str
    grid: Union[str, ParamGrid, None] = None
    config: Tuple[Tuple[str, object], ...] = ()
    outer_k: int = 10
    inner_k: int = 10
    seed: int = 0
    impute_scope: str = "fold"
    score_all_configs: bool = False
    label_col: Optional[str] = None
    n_trees: int = N_TREES
    variant: str = ""

    def __post_init__(self):
        if self.impute_scope not in ("fold", "global"):
            raise ValueError(f"impute_scope must be 'fold' or 'global', got {self.impute_scope!r}")
        if self.outer_k < 2 or self.inner_k < 2:
            raise ValueError("fold counts must be >= 2")
        if isinstance(self.config, dict):
            object.__setattr__(self, "config", tuple(self.config.items()))
        if isinstance(self.grid, str):
            object.__setattr__(self, "grid", get_grid(self.grid))
        if self.grid is not None and self.grid.method != self.method:
            raise ValueError(f"grid {self.grid.name!r} is for {self.grid.method}, not {self.method}")

    @property
    def label(self) -> str:
        if self.variant:
            return self.variant
        return f"{'tuned' if self.grid is not None else 'default'}-{self.method}"

    def configs(self) -> List[Dict]:
        if self.grid is None:
            return [dict(self.config)]
        return expand_grid(self.grid)


@dataclass
class CvResult:
    dataset: str
    method: str
    label: str
    accuracies: np.ndarray  # per outer fold
    chosen_index: np.ndarray  # config index per fold; 0 for a fixed config
    chosen_configs: list
    inner_scores: Optional[np.ndarray] = None  # (n_configs, outer_k) mean inner accuracy
    config_test_acc: Optional[np.ndarray] = None  # (n_configs, outer_k), step (iii)
    search_seconds: np.ndarray = field(default_factory=lambda: np.zeros(0))  # summed per fold
    config_seconds: Optional[np.ndarray] = None  # (n_configs, outer_k) inner search time
    fit_seconds: np.ndarray = field(default_factory=lambda: np.zeros(0))
    wall_seconds: float = 0.0
    configs: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))


@dataclass(frozen=True)
class TimingRecord:
    dataset: str
    label: str
    search_seconds: float  # mean per outer fold, sequential-equivalent
    fit_seconds: float  # mean per outer fold
    wall_seconds: float


def record_timings(result: CvResult) -> TimingRecord:
    """Average per-fold search and final-fit seconds.

    Search time is the sum of per-config times, i.e. what a single worker
    would have spent, however the configs were actually scheduled.
    """
    search = float(np.mean(result.search_seconds)) if result.search_seconds.size else 0.0
    fit = float(np.mean(result.fit_seconds)) if result.fit_seconds.size else 0.0
    return TimingRecord(result.dataset, result.label, search, fit, result.wall_seconds)


# ----------------------------------------------------------------- fitting

def fit_model(method, config, data: DataMatrix, seed, n_trees=N_TREES, sorted_cols=None):
    params = make_params(method, config, seed=seed, n_trees=n_trees)
    if method == "rf":
        return fit_forest(data, params, sorted_cols=sorted_cols)
    if method == "gb":
        return fit_gb(data, params, sorted_cols=sorted_cols)
    return fit_xgb(data, params, sorted_cols=sorted_cols)


def predict_labels(model, X) -> np.ndarray:
    if isinstance(model, Forest):
        return model.predict(X)
    if isinstance(model, BoostedEnsemble):
        return model.predict_class(X)
    raise TypeError(f"not a model: {type(model).__name__}")


def accuracy(model, X, y) -> float:
    return float(np.mean(predict_labels(model, X) == np.asarray(y)))


def _impute_pair(data: DataMatrix, train_rows, other_rows):
    """Impute train and held-out rows from training statistics only."""
    filled = impute_mean(data, stats_rows=train_rows)
    return filled.take(train_rows), filled.take(other_rows)


def inner_fold_plan(labels, inner_k, seed) -> FoldPlan:
    """Stratified plan whose every training part holds every class present.

    Rebuilt with a fresh sub-seed up to ``INNER_RETRIES`` times.
    """
    labels = np.asarray(labels)
    if labels.shape[0] < inner_k:
        raise DataError(f"{labels.shape[0]} training rows cannot form {inner_k} inner folds")
    present = np.unique(labels)
    for attempt in range(INNER_RETRIES + 1):
        plan = stratified_kfold(labels, inner_k, seed=derive_seed(seed, "inner-plan", attempt))
        if all(np.array_equal(np.unique(labels[tr]), present) for tr, _ in plan.splits()):
            return plan
    raise TuningError(f"no inner {inner_k}-fold plan keeps every class in every training "
                      f"part after {INNER_RETRIES} retries")


@dataclass
class _Inner:
    train: DataMatrix
    sorted_cols: object
    val_X: np.ndarray
    val_y: np.ndarray


def _inner_sets(data: DataMatrix, inner_k, seed, impute) -> List[_Inner]:
    plan = inner_fold_plan(data.labels, inner_k, seed)
    out = []
    for tr, va in plan.splits():
        if impute:
            train, val = _impute_pair(data, tr, va)
        else:
            train, val = data.take(tr), data.take(va)
        out.append(_Inner(train, build_sorted_columns(train), val.X, val.labels))
    return out


def _score_configs(method, configs, sets: List[_Inner], seed, n_trees):
    """Mean inner accuracy and summed seconds per config."""
    scores = np.zeros(len(configs))
    seconds = np.zeros(len(configs))
    for c, config in enumerate(configs):
        accs = []
        for i, s in enumerate(sets):
            t0 = time.perf_counter()
            model = fit_model(method, config, s.train, derive_seed(seed, "fit", i), n_trees,
                              sorted_cols=s.sorted_cols)
            accs.append(accuracy(model, s.val_X, s.val_y))
            seconds[c] += time.perf_counter() - t0
        scores[c] = np.mean(accs)
    return scores, seconds


def inner_tune(train: DataMatrix, grid: ParamGrid, inner_k=10, seed=0, n_trees=N_TREES,
               impute=True):
    """Grid search by inner stratified cross-validation.

    :param train: training rows; may still contain missing cells, which are
        imputed per inner fold from that fold's training part when ``impute``.
    :returns: ``(best_config, mean_inner_accuracy_per_config)``. The best
        config has the highest mean; ties go to the lowest config index.
    """
    configs = expand_grid(grid)
    sets = _inner_sets(train, inner_k, seed, impute)
    scores, _ = _score_configs(grid.method, configs, sets, seed, n_trees)
    return configs[int(np.argmax(scores))], scores


# --------------------------------------------------------- experiment runs

@functools.lru_cache(maxsize=8)
def _load(path, label_col):
    return load_csv(path, label_col=label_col)


def outer_plan(spec: ExperimentSpec, data: DataMatrix) -> FoldPlan:
    # keyed by dataset only: every method sees the same outer folds
    return stratified_kfold(data.labels, spec.outer_k, seed=derive_seed(spec.seed, "outer", spec.dataset))


@functools.lru_cache(maxsize=4)
def _fold_data(spec: ExperimentSpec, fold: int):
    """(raw or globally imputed training rows, imputed train, imputed test)."""
    data = _load(spec.path, spec.label_col)
    plan = outer_plan(spec, data)
    tr, te = plan.train_rows(fold), plan.test_rows(fold)
    if spec.impute_scope == "global":
        data = impute_mean(data)
    train, test = _impute_pair(data, tr, te)
    return data.take(tr), train, test


def _tune_seed(spec, fold):
    return derive_seed(spec.seed, "tune", spec.dataset, spec.method, fold)


def _final_seed(spec, fold):
    return derive_seed(spec.seed, "final", spec.dataset, spec.method, fold)


@functools.lru_cache(maxsize=4)
def _fold_inner_sets(spec, fold):
    raw_train, _, _ = _fold_data(spec, fold)
    return _inner_sets(raw_train, spec.inner_k, _tune_seed(spec, fold),
                       impute=spec.impute_scope == "fold")


def _inner_unit(spec: ExperimentSpec, fold: int, lo: int, hi: int):
    configs = spec.configs()[lo:hi]
    return _score_configs(spec.method, configs, _fold_inner_sets(spec, fold),
                          _tune_seed(spec, fold), spec.n_trees)


@functools.lru_cache(maxsize=4)
def _fold_sorted(spec, fold):
    _, train, _ = _fold_data(spec, fold)
    return build_sorted_columns(train)


def _final_unit(spec: ExperimentSpec, fold: int, indices: Tuple[int, ...]):
    """Fit each listed config on the whole outer-train part; test accuracy and seconds."""
    _, train, test = _fold_data(spec, fold)
    configs = spec.configs()
    accs, secs = [], []
    for c in indices:
        t0 = time.perf_counter()
        model = fit_model(spec.method, configs[c], train, _final_seed(spec, fold), spec.n_trees,
                          sorted_cols=_fold_sorted(spec, fold))
        secs.append(time.perf_counter() - t0)
        accs.append(accuracy(model, test.X, test.labels))
    return np.array(accs), np.array(secs)


def _chunks(n, size):
    return [(lo, min(n, lo + size)) for lo in range(0, n, size)]


class _Runner:
    """Runs work units inline or on a process pool; results keep submission order."""

    def __init__(self, workers):
        self.workers = max(1, int(workers or 1))
        self.pool = ProcessPoolExecutor(self.workers) if self.workers > 1 else None

    def map(self, fn, arg_list):
        if self.pool is None:
            return [fn(*a) for a in arg_list]
        futures = [self.pool.submit(fn, *a) for a in arg_list]
        return [f.result() for f in futures]

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def run_experiment(spec: ExperimentSpec, workers: int = 1, runner=None) -> CvResult:
    """Outer cross-validation of one method on one dataset; see module doc."""
    t_wall = time.perf_counter()
    data = _load(spec.path, spec.label_col)
    if spec.outer_k > data.n_rows:
        raise DataError(f"{data.n_rows} rows cannot form {spec.outer_k} folds")
    configs = spec.configs()
    n_cfg = len(configs)
    k = spec.outer_k
    own = runner is None
    runner = runner or _Runner(workers)
    try:
        inner_scores = config_seconds = None
        if spec.grid is not None:
            chunk = max(1, -(-n_cfg // (4 * runner.workers)))
            units = [(spec, f, lo, hi) for f in range(k) for lo, hi in _chunks(n_cfg, chunk)]
            parts = runner.map(_inner_unit, units)
            inner_scores = np.zeros((n_cfg, k))
            config_seconds = np.zeros((n_cfg, k))
            for (_, f, lo, hi), (sc, secs) in zip(units, parts):
                inner_scores[lo:hi, f] = sc
                config_seconds[lo:hi, f] = secs
            # argmax takes the first maximum: lowest config index on ties
            chosen = np.argmax(inner_scores, axis=0)
            search_seconds = config_seconds.sum(axis=0)
        else:
            chosen = np.zeros(k, dtype=np.int64)
            search_seconds = np.zeros(k)

        finals = runner.map(_final_unit, [(spec, f, (int(chosen[f]),)) for f in range(k)])
        accuracies = np.array([a[0] for a, _ in finals])
        fit_seconds = np.array([s[0] for _, s in finals])

        config_test = None
        if spec.score_all_configs:
            chunk = max(1, -(-n_cfg // (4 * runner.workers)))
            units = [(spec, f, tuple(range(lo, hi))) for f in range(k) for lo, hi in _chunks(n_cfg, chunk)]
            parts = runner.map(_final_unit, units)
            config_test = np.zeros((n_cfg, k))
            for (_, f, idx), (acc, _) in zip(units, parts):
                config_test[list(idx), f] = acc
    finally:
        if own:
            runner.close()
    return CvResult(dataset=spec.dataset, method=spec.method, label=spec.label,
                    accuracies=accuracies, chosen_index=np.asarray(chosen, dtype=np.int64),
                    chosen_configs=[configs[int(c)] for c in chosen],
                    inner_scores=inner_scores, config_test_acc=config_test,
                    search_seconds=search_seconds, config_seconds=config_seconds,
                    fit_seconds=fit_seconds, wall_seconds=time.perf_counter() - t_wall,
                    configs=configs)


def default_workers() -> int:
    return os.cpu_count() or 1

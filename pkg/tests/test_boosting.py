import copy

import numpy as np
import pytest

from boostbench.boosting import BoostParams, BoostedEnsemble, fit_gb, fit_xgb
from boostbench.data import impute_mean, load_csv
from boostbench.losses import BinaryLogistic, SquaredLoss
from boostbench.serialize import ModelBundle, dumps
from boostbench.tree import Tree

from conftest import DATA


def _binary(seed=0, n=150, d=4):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    y = (X[:, 0] + 0.5 * X[:, 1] ** 2 + 0.3 * r.normal(size=n) > 0.5).astype(int)
    return X, y


def test_zero_trees_predicts_base_score():
    X, y = _binary()
    ens = fit_gb(X, BoostParams(n_trees=0), y=y)
    assert ens.tree_count == 0
    np.testing.assert_allclose(ens.predict_margin(X), ens.base_score[0])


def test_empty_balanced_ensemble_proba_half():
    ens = BoostedEnsemble(np.zeros(1), [], 0.1, BinaryLogistic(), 3)
    np.testing.assert_allclose(ens.predict_proba(np.zeros((2, 3))), 0.5)


def test_root_only_margin_hand_arithmetic():
    ens = BoostedEnsemble(np.array([0.25]), [[Tree.leaf(2.0, 1)]], 0.1, SquaredLoss(), 1)
    assert ens.predict_margin(np.array([[7.0]]))[0] == pytest.approx(0.25 + 0.1 * 2.0)


def test_one_deep_tree_interpolates_squared():
    r = np.random.default_rng(4)
    X = r.permutation(40).reshape(-1, 1).astype(float)
    y = r.normal(size=40)
    ens = fit_gb(X, BoostParams(n_trees=1, learning_rate=1.0, max_depth=None), y=y,
                 loss=SquaredLoss())
    np.testing.assert_allclose(ens.predict_margin(X), y, atol=1e-12)


def test_residuals_vanish_keeps_tree_count():
    X = np.arange(10.0).reshape(-1, 1)
    y = np.arange(10.0)
    ens = fit_gb(X, BoostParams(n_trees=5, learning_rate=1.0, max_depth=None), y=y,
                 loss=SquaredLoss())
    assert ens.tree_count == 5
    assert all(t.n_nodes == 1 and t.value[0, 0] == 0.0 for step in ens.trees[1:] for t in step)


def test_huge_gamma_root_only():
    X, y = _binary()
    ens = fit_xgb(X, BoostParams(n_trees=5, mode="xgb", gamma=1e6), y=y)
    assert all(t.n_nodes == 1 for step in ens.trees for t in step)
    roots = sum(step[0].value[0, 0] for step in ens.trees)
    np.testing.assert_allclose(ens.predict_margin(X), ens.base_score[0] + 0.1 * roots)


def test_xgb_training_loss_non_increasing():
    X, y = _binary(seed=2)
    ens = fit_xgb(X, BoostParams(n_trees=60, mode="xgb"), y=y, track_loss=True)
    assert np.all(np.diff(ens.train_loss) <= 1e-9)


def test_xgb_squared_no_penalty_equals_gb():
    r = np.random.default_rng(6)
    X = r.normal(size=(120, 3))
    y = np.sin(X[:, 0]) + X[:, 1] + 0.1 * r.normal(size=120)
    for depth in (1, 3, 5):
        kw = dict(n_trees=20, max_depth=depth, reg_lambda=0.0, gamma=0.0)
        a = fit_gb(X, BoostParams(**kw), y=y, loss=SquaredLoss())
        b = fit_xgb(X, BoostParams(mode="xgb", **kw), y=y, loss=SquaredLoss())
        np.testing.assert_allclose(a.predict_margin(X), b.predict_margin(X), atol=1e-9)


def test_shrinkage_equivalence():
    r = np.random.default_rng(8)
    X = r.normal(size=(80, 2))
    y = X[:, 0] * 2 + r.normal(size=80)
    ens = fit_gb(X, BoostParams(n_trees=15, learning_rate=0.3), y=y, loss=SquaredLoss())
    unit = copy.deepcopy(ens)
    unit.learning_rate = 1.0
    for step in unit.trees:
        for t in step:
            t.value = t.value * 0.3
    np.testing.assert_allclose(unit.predict_margin(X), ens.predict_margin(X), rtol=1e-12, atol=1e-12)


def test_softmax_tree_count_and_proba():
    d = impute_mean(load_csv(DATA / "iris.csv"))
    ens = fit_gb(d, BoostParams(n_trees=7))
    assert ens.tree_count == 7 * 3
    p = ens.predict_proba(d.X)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.mean(ens.predict_class(d.X) == d.labels) > 0.95


def test_feature_count_mismatch():
    X, y = _binary()
    ens = fit_gb(X, BoostParams(n_trees=2), y=y)
    with pytest.raises(ValueError):
        ens.predict_margin(np.zeros((1, 3)))


def test_determinism_bit_identical():
    X, y = _binary()
    for mode in ("gb", "xgb"):
        p = BoostParams(n_trees=10, mode=mode, subsample=0.5, max_features=0.5,
                        colsample_bylevel="sqrt", seed=42)
        fit = fit_gb if mode == "gb" else fit_xgb
        assert dumps(ModelBundle(fit(X, p, y=y))) == dumps(ModelBundle(fit(X, p, y=y)))


def test_subsample_seed_changes_model():
    X, y = _binary()
    a = fit_gb(X, BoostParams(n_trees=5, subsample=0.5, seed=1), y=y)
    b = fit_gb(X, BoostParams(n_trees=5, subsample=0.5, seed=2), y=y)
    assert not np.allclose(a.predict_margin(X), b.predict_margin(X))


def test_tictactoe_training_reaches_full_accuracy():
    d = impute_mean(load_csv(DATA / "tictactoe.csv"))
    ens = fit_gb(d, BoostParams(n_trees=200, learning_rate=0.3, max_depth=5))
    assert np.mean(ens.predict_class(d.X) == d.labels) == 1.0


def test_params_validation():
    for kw in ({"learning_rate": 0}, {"learning_rate": 1.5}, {"subsample": 0},
               {"gamma": -1}, {"mode": "dart"}):
        with pytest.raises(ValueError):
            BoostParams(**kw)


def test_gb_agrees_with_sklearn():
    """Same splits (Friedman MSE orders splits like variance reduction) and
    the same per-leaf Newton step, so probabilities should coincide."""
    ensemble = pytest.importorskip("sklearn.ensemble")
    r = np.random.default_rng(11)
    X = r.normal(size=(200, 4))
    y = (X[:, 0] - X[:, 2] + 0.5 * r.normal(size=200) > 0).astype(int)
    ours = fit_gb(X, BoostParams(n_trees=30, learning_rate=0.1, max_depth=3), y=y)
    sk = ensemble.GradientBoostingClassifier(n_estimators=30, learning_rate=0.1, max_depth=3,
                                             random_state=0).fit(X, y)
    np.testing.assert_allclose(ours.predict_proba(X), sk.predict_proba(X), atol=1e-8)

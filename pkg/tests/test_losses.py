import numpy as np
import pytest

from boostbench.losses import (BinaryLogistic, Softmax, SquaredLoss, init_constant,
                               loss_for_classes, loss_from_dict, pseudo_residuals)

from oracles import central_difference

EPS = 1e-5


def _rel(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)


def fd_check(loss, y, F):
    """Max relative error of the analytic gradient and hessian against
    central differences of value and gradient respectively."""
    g, h = loss.gradient(y, F), loss.hessian(y, F)
    if F.ndim == 1:
        g_fd = central_difference(lambda Z: loss.value(y, Z), F, EPS)
        h_fd = central_difference(lambda Z: loss.gradient(y, Z), F, EPS)
        return max(_rel(g, g_fd).max(), _rel(h, h_fd).max())
    worst = 0.0
    for k in range(F.shape[1]):
        e = np.zeros_like(F)
        e[:, k] = EPS
        g_fd = (loss.value(y, F + e) - loss.value(y, F - e)) / (2 * EPS)
        h_fd = (loss.gradient(y, F + e)[:, k] - loss.gradient(y, F - e)[:, k]) / (2 * EPS)
        worst = max(worst, _rel(g[:, k], g_fd).max(), _rel(h[:, k], h_fd).max())
    return worst


def test_squared_fd():
    r = np.random.default_rng(0)
    F, y = r.uniform(-5, 5, 100), r.normal(size=100)
    assert fd_check(SquaredLoss(), y, F) <= 1e-6


def test_logistic_fd():
    r = np.random.default_rng(1)
    F, y = r.uniform(-5, 5, 100), r.integers(0, 2, 100)
    assert fd_check(BinaryLogistic(), y, F) <= 1e-6


def test_softmax_fd():
    r = np.random.default_rng(2)
    F, y = r.uniform(-4, 4, (100, 4)), r.integers(0, 4, 100)
    assert fd_check(Softmax(4), y, F) <= 1e-6


def test_hessians_non_negative():
    F = np.linspace(-30, 30, 61)
    assert np.all(BinaryLogistic().hessian(np.zeros(61), F) >= 0)
    assert np.all(Softmax(3).hessian(np.zeros(61, int), np.column_stack([F, -F, F / 2])) >= 0)


def test_logistic_stable_at_extremes():
    v = BinaryLogistic().value(np.array([0.0, 1.0]), np.array([800.0, -800.0]))
    assert np.all(np.isfinite(v)) and v == pytest.approx([800.0, 800.0])


def test_init_constant_examples():
    assert init_constant([1, 2, 3], SquaredLoss())[0] == 2.0
    assert init_constant([1, 1, 0, 0], BinaryLogistic())[0] == 0.0
    assert init_constant([1, 1, 1, 0], BinaryLogistic())[0] == pytest.approx(np.log(3))
    sm = init_constant([0, 0, 1, 2], Softmax(3))
    assert sm.sum() == pytest.approx(0.0)
    assert np.exp(sm - sm.max()) / np.exp(sm - sm.max()).sum() == pytest.approx([0.5, 0.25, 0.25])
    with pytest.raises(ValueError):
        init_constant([], SquaredLoss())


def test_logistic_init_is_numeric_argmin():
    from scipy.optimize import minimize_scalar
    y = np.array([1, 1, 1, 0])
    res = minimize_scalar(lambda a: BinaryLogistic().value(y, np.full(4, a)).sum())
    assert init_constant(y, BinaryLogistic())[0] == pytest.approx(res.x, abs=1e-6)


def test_pseudo_residual_examples():
    assert pseudo_residuals([3.0], [1.0], SquaredLoss())[0] == 2.0
    assert pseudo_residuals([1], [0.0], BinaryLogistic())[0] == 0.5
    r = pseudo_residuals([0], np.zeros((1, 3)), Softmax(3))[0]
    assert r == pytest.approx([2 / 3, -1 / 3, -1 / 3])


def test_loss_selection_and_round_trip():
    assert isinstance(loss_for_classes(2), BinaryLogistic)
    assert loss_for_classes(5) == Softmax(5)
    for loss in (SquaredLoss(), BinaryLogistic(), Softmax(3)):
        assert loss_from_dict(loss.to_dict()) == loss
    with pytest.raises(ValueError):
        loss_from_dict({"kind": "hinge"})

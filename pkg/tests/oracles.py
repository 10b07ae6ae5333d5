"""Independent reference computations used as test oracles.

Nothing here imports the package's split or gain code: each oracle works
from the defining objective or by brute-force enumeration.
"""
import itertools

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import rankdata


def leaf_objective_min(G, H, lam):
    """Numerically minimise ``G w + (H + lam) w^2 / 2`` over w; returns (w*, value)."""
    a = H + lam

    def f(w):
        return G * w + 0.5 * a * w * w

    # bracket generously around the analytic scale so Brent converges
    scale = max(1.0, abs(G) / a)
    res = minimize_scalar(f, bracket=(-10 * scale, 0.0, 10 * scale), method="brent",
                          options={"xtol": 1e-14, "maxiter": 500})
    # Brent pins the minimiser down only to ~sqrt(machine eps); polish it as
    # the root of a wide central-difference slope (exact for a quadratic)
    def slope(w):
        return (f(w + 0.5) - f(w - 0.5)) / 1.0

    pad = 1e-4 * max(1.0, abs(res.x))
    w = brentq(slope, res.x - pad, res.x + pad, xtol=1e-15, rtol=1e-15)
    return w, f(w)


def split_gain_oracle(GL, HL, GR, HR, lam, gamma):
    """Objective (with gamma per leaf) of one leaf minus that of two leaves."""
    _, parent = leaf_objective_min(GL + GR, HL + HR, lam)
    _, left = leaf_objective_min(GL, HL, lam)
    _, right = leaf_objective_min(GR, HR, lam)
    return (parent + gamma) - (left + right + 2 * gamma)


def brute_force_split(X, g, h, lam, gamma, min_leaf=1, weights=None):
    """Best (feature, threshold, gain) over every midpoint of every feature.

    Gains are computed from the masks directly. Ties go to the lowest
    feature, then the lowest threshold. Returns None if no split has gain > 0.
    """
    n, d = X.shape
    w = np.ones(n) if weights is None else weights
    G, H = np.sum(g * w), np.sum(h * w)
    best = None
    for f in range(d):
        u = np.unique(X[w > 0, f])
        for lo, hi in zip(u[:-1], u[1:]):
            thr = 0.5 * (lo + hi)
            left = (X[:, f] <= thr) & (w > 0)
            nl, nr = w[left].sum(), w[(~left) & (w > 0)].sum()
            if nl < min_leaf or nr < min_leaf:
                continue
            GL, HL = np.sum(g[left] * w[left]), np.sum(h[left] * w[left])
            GR, HR = G - GL, H - HL
            gain = 0.5 * (GL ** 2 / (HL + lam) + GR ** 2 / (HR + lam) - G ** 2 / (H + lam)) - gamma
            if best is None or gain > best[2]:
                best = (f, thr, gain)
    if best is None or not best[2] > 0:
        return None
    return best


def central_difference(fun, F, eps=1e-5):
    return (fun(F + eps) - fun(F - eps)) / (2 * eps)


def rank_oracle(row):
    """Fractional ranks, higher value -> higher rank, by explicit sorting."""
    row = list(row)
    order = sorted(range(len(row)), key=lambda i: row[i])
    ranks = [0.0] * len(row)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and row[order[j + 1]] == row[order[i]]:
            j += 1
        avg = (i + 1 + j + 1) / 2.0
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        i = j + 1
    return ranks


def transition_oracle(configs, ranks, param, values):
    """cell[a][b] by explicit pairing of configs that differ only in ``param``."""
    nv = len(values)
    better = np.zeros((nv, nv))
    count = np.zeros((nv, nv))
    for i, ci in enumerate(configs):
        for j, cj in enumerate(configs):
            if i == j:
                continue
            if all(ci[k] == cj[k] for k in ci if k != param):
                a, b = values.index(ci[param]), values.index(cj[param])
                count[a, b] += 1
                better[a, b] += ranks[j] > ranks[i]
    with np.errstate(invalid="ignore"):
        return np.where(count > 0, 100.0 * better / np.maximum(count, 1), 0.0)


def all_thresholds(X):
    for f in range(X.shape[1]):
        u = np.unique(X[:, f])
        for lo, hi in zip(u[:-1], u[1:]):
            yield f, 0.5 * (lo + hi)


def exhaustive_depth2_gini_accuracy(X, y):
    """Best training accuracy reachable by any depth-2 axis-aligned tree."""
    best = 0.0
    splits = list(all_thresholds(X))
    for f0, t0 in splits:
        left = X[:, f0] <= t0
        acc = 0
        for part in (left, ~left):
            sub_best = 0
            idx = np.flatnonzero(part)
            if idx.size == 0:
                continue
            cands = [(None, None)] + list(all_thresholds(X[idx]))
            for f1, t1 in cands:
                if f1 is None:
                    groups = [idx]
                else:
                    m = X[idx, f1] <= t1
                    groups = [idx[m], idx[~m]]
                correct = sum(np.bincount(y[gi]).max() for gi in groups if gi.size)
                sub_best = max(sub_best, correct)
            acc += sub_best
        best = max(best, acc / len(y))
    return best


def product_configs(axes):
    names = [a for a, _ in axes]
    return [dict(zip(names, c)) for c in itertools.product(*(v for _, v in axes))]

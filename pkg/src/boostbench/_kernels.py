"""Compiled inner loops for split search, tree growth and tree traversal.

All growth criteria share one gain shape. For a node with weighted count W
and statistic sums S_k,

    newton:   0.5 * [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)] - gamma
    variance: sum_k S_Lk^2/W_L + S_Rk^2/W_R - S_k^2/W        (k = residual)
    gini:     same as variance with one indicator column per class

so only the statistic columns and the acceptance rule differ.
"""
import numpy as np
from numba import njit

NEWTON = 0
VARIANCE = 1
GINI = 2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def feature_permutation(seed, key, d):
    """Deterministic permutation of ``range(d)`` keyed by (seed, key)."""
    perm = np.arange(d)
    state = _mix64(np.uint64(seed) ^ _mix64(np.uint64(key) + _GOLDEN))
    for i in range(d - 1, 0, -1):
        state = state + _GOLDEN
        r = _mix64(state)
        j = np.int64((r >> np.uint64(11)) % np.uint64(i + 1))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm


@njit(cache=True)
def newton_term(G, H, lam):
    denom = H + lam
    if denom <= 0.0:
        return np.nan
    return G * G / denom


@njit(cache=True)
def newton_gain(GL, HL, GR, HR, lam, gamma):
    tl = newton_term(GL, HL, lam)
    tr = newton_term(GR, HR, lam)
    tp = newton_term(GL + GR, HL + HR, lam)
    if np.isnan(tl) or np.isnan(tr) or np.isnan(tp):
        return -gamma
    return 0.5 * (tl + tr - tp) - gamma


@njit(cache=True)
def _sum_term(S, W, n_gain):
    acc = 0.0
    for k in range(n_gain):
        acc += S[k] * S[k]
    return acc / W


@njit(cache=True)
def _gain(criterion, SL, WL, SR, WR, parent_term, n_gain, lam, gamma):
    if criterion == NEWTON:
        tl = newton_term(SL[0], SL[1], lam)
        tr = newton_term(SR[0], SR[1], lam)
        if np.isnan(tl) or np.isnan(tr) or np.isnan(parent_term):
            return -gamma
        return 0.5 * (tl + tr - parent_term) - gamma
    return _sum_term(SL, WL, n_gain) + _sum_term(SR, WR, n_gain) - parent_term


@njit(cache=True)
def _hess_ok(criterion, SL, SR, min_hess):
    # newton children need a hessian sum of at least min_hess
    return criterion != NEWTON or (SL[1] >= min_hess and SR[1] >= min_hess)


@njit(cache=True)
def _has_cut(cuts, n_cut, lo, hi):
    # any cut c with lo < c < hi
    pos = np.searchsorted(cuts[:n_cut], lo, side="right")
    return pos < n_cut and cuts[pos] < hi


@njit(cache=True)
def scan_feature(X, f, seg, w, stats, n_gain, criterion, lam, gamma, min_leaf, min_hess,
                 S_tot, W_tot, parent_term, use_cuts, cuts, n_cuts, SL):
    """Best (gain, threshold, n_left_rows) for one feature over a sorted segment.

    Returns gain = -inf when the feature has no admissible threshold.
    """
    best_gain = -np.inf
    best_thr = 0.0
    best_pos = -1
    s = stats.shape[1]
    SR = np.empty(s)
    for k in range(s):
        SL[k] = 0.0
    WL = 0.0
    m = seg.shape[0]
    for i in range(m - 1):
        r = seg[i]
        for k in range(s):
            SL[k] += stats[r, k]
        WL += w[r]
        v = X[r, f]
        v_next = X[seg[i + 1], f]
        if v_next <= v:
            continue
        WR = W_tot - WL
        if WL < min_leaf or WR < min_leaf:
            continue
        if use_cuts and not _has_cut(cuts[f], n_cuts[f], v, v_next):
            continue
        for k in range(s):
            SR[k] = S_tot[k] - SL[k]
        if not _hess_ok(criterion, SL, SR, min_hess):
            continue
        g = _gain(criterion, SL, WL, SR, WR, parent_term, n_gain, lam, gamma)
        if g > best_gain:
            best_gain = g
            best_thr = 0.5 * (v + v_next)
            if best_thr >= v_next:
                best_thr = v
            best_pos = i + 1
    return best_gain, best_thr, best_pos


@njit(cache=True)
def _parent_term(criterion, S, W, n_gain, lam):
    if criterion == NEWTON:
        return newton_term(S[0], S[1], lam)
    return _sum_term(S, W, n_gain)


@njit(cache=True)
def best_split(X, work, start, end, features, w, stats, n_gain, criterion, lam, gamma,
               min_leaf, min_hess, use_cuts, cuts, n_cuts, skip_constant, quota):
    """Best split of the node whose rows are ``work[f, start:end]`` for every f.

    ``features`` is the candidate order. When ``skip_constant`` is set,
    features constant within the node do not count against ``quota``.
    Ties go to the lowest feature index, then the lowest threshold.
    Returns (feature, threshold, gain, n_left_rows); feature -1 if none.
    """
    s = stats.shape[1]
    S_tot = np.zeros(s)
    W_tot = 0.0
    for i in range(start, end):
        r = work[0, i]
        W_tot += w[r]
        for k in range(s):
            S_tot[k] += stats[r, k]
    parent_term = _parent_term(criterion, S_tot, W_tot, n_gain, lam)
    SL = np.empty(s)
    best_f = -1
    best_thr = 0.0
    best_gain = -np.inf
    best_nl = 0
    used = 0
    for f in features:
        if used >= quota:
            break
        first = X[work[f, start], f]
        last = X[work[f, end - 1], f]
        if skip_constant and not last > first:
            continue
        used += 1
        g, thr, pos = scan_feature(X, f, work[f, start:end], w, stats, n_gain, criterion,
                                   lam, gamma, min_leaf, min_hess, S_tot, W_tot, parent_term,
                                   use_cuts, cuts, n_cuts, SL)
        if pos < 0:
            continue
        if g > best_gain or (g == best_gain and f < best_f):
            best_gain = g
            best_f = f
            best_thr = thr
            best_nl = pos
    return best_f, best_thr, best_gain, best_nl


@njit(cache=True)
def grow(X, order, w, stats, n_gain, criterion, lam, gamma, max_depth, min_split,
         min_leaf, min_hess, n_draw, per_level, skip_constant, seed, use_cuts, cuts, n_cuts):
    """Depth-first growth on pre-sorted row lists.

    ``order[f]`` lists the in-sample rows sorted by feature f. Each split
    stably partitions every feature's segment, so no node ever re-sorts.
    Returns node arrays; leaves have feature == -1.
    """
    d = order.shape[0]
    m = order.shape[1]
    s = stats.shape[1]
    cap = 2 * m + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    node_stats = np.zeros((cap, s))
    node_weight = np.zeros(cap)
    node_gain = np.zeros(cap)
    depth_of = np.zeros(cap, dtype=np.int64)
    if m == 0:
        return feature[:1], threshold[:1], left[:1], right[:1], node_stats[:1], node_weight[:1], node_gain[:1], depth_of[:1]

    work = order.copy()
    tmp = np.empty(m, dtype=np.int64)
    goes_left = np.zeros(X.shape[0], dtype=np.bool_)
    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = m
    top = 1
    n_nodes = 1
    level_perm = np.empty((0, d), dtype=np.int64)
    if per_level:
        levels = min(max_depth, m) + 1
        level_perm = np.empty((levels, d), dtype=np.int64)
        for lv in range(levels):
            level_perm[lv] = feature_permutation(seed, lv, d)

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = depth_of[node]
        W = 0.0
        for i in range(start, end):
            r = work[0, i]
            W += w[r]
            for k in range(s):
                node_stats[node, k] += stats[r, k]
        node_weight[node] = W

        if depth >= max_depth or W < min_split or W < 2 * min_leaf or end - start < 2:
            continue
        if criterion == GINI:
            mx = 0.0
            for k in range(n_gain):
                if node_stats[node, k] > mx:
                    mx = node_stats[node, k]
            if mx >= W:
                continue

        if per_level:
            feats = level_perm[depth]
        else:
            feats = feature_permutation(seed, node + 1000003, d)
        bf, bt, bg, nl = best_split(X, work, start, end, feats, w, stats, n_gain,
                                    criterion, lam, gamma, min_leaf, min_hess, use_cuts, cuts,
                                    n_cuts, skip_constant, n_draw)
        if bf < 0:
            continue
        if criterion != GINI and not bg > 0.0:
            continue

        for i in range(start, end):
            r = work[0, i]
            goes_left[r] = X[r, bf] <= bt
        for f in range(d):
            a = start
            b = 0
            for i in range(start, end):
                r = work[f, i]
                if goes_left[r]:
                    work[f, a] = r
                    a += 1
                else:
                    tmp[b] = r
                    b += 1
            for i in range(b):
                work[f, a + i] = tmp[i]
        mid = start + nl

        li = n_nodes
        ri = n_nodes + 1
        n_nodes += 2
        feature[node] = bf
        threshold[node] = bt
        left[node] = li
        right[node] = ri
        node_gain[node] = bg
        depth_of[li] = depth + 1
        depth_of[ri] = depth + 1
        # right pushed first so the left subtree is grown first
        stack_node[top] = ri
        stack_start[top] = mid
        stack_end[top] = end
        top += 1
        stack_node[top] = li
        stack_start[top] = start
        stack_end[top] = mid
        top += 1

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
            node_stats[:n_nodes], node_weight[:n_nodes], node_gain[:n_nodes], depth_of[:n_nodes])


@njit(cache=True)
def apply_tree(X, feature, threshold, left, right):
    """Leaf index reached by each row of X."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True)
def _offer(j, f, g, lo, hi, SL, WL, best_gain, best_f, best_thr, best_SL, best_WL):
    """Record candidate (f, midpoint of lo/hi) for open node j if it wins."""
    if g > best_gain[j] or (g == best_gain[j] and f < best_f[j]):
        best_gain[j] = g
        best_f[j] = f
        thr = 0.5 * (lo + hi)
        if thr >= hi:
            thr = lo
        best_thr[j] = thr
        for k in range(SL.shape[0]):
            best_SL[j, k] = SL[k]
        best_WL[j] = WL


@njit(cache=True)
def _accumulate_hist(codes, rslot, stats, w, hist_f, hist):
    # the one- and two-column cases are spelled out: a runtime-length inner
    # loop costs about 2x here
    n = codes.shape[0]
    s = stats.shape[1]
    n_hist = hist_f.shape[0]
    if s == 2:
        for r in range(n):
            j = rslot[r]
            if j < 0:
                continue
            a = stats[r, 0]
            b = stats[r, 1]
            c = w[r]
            for q in range(n_hist):
                v = codes[r, hist_f[q]]
                hist[j, q, v, 0] += a
                hist[j, q, v, 1] += b
                hist[j, q, v, 2] += c
    elif s == 1:
        for r in range(n):
            j = rslot[r]
            if j < 0:
                continue
            a = stats[r, 0]
            c = w[r]
            for q in range(n_hist):
                v = codes[r, hist_f[q]]
                hist[j, q, v, 0] += a
                hist[j, q, v, 1] += c
    else:
        for r in range(n):
            j = rslot[r]
            if j < 0:
                continue
            for q in range(n_hist):
                v = codes[r, hist_f[q]]
                for k in range(s):
                    hist[j, q, v, k] += stats[r, k]
                hist[j, q, v, s] += w[r]


@njit(cache=True)
def grow_levelwise(X, perm, codes, uvals, n_unique, hist_max, w, stats, n_gain, criterion,
                   lam, gamma, max_depth, min_split, min_leaf, min_hess, n_draw, seed, use_cuts,
                   cuts, n_cuts):
    """Level-by-level growth over the global per-feature sort order.

    Each level draws one feature subset. A drawn feature with at most
    ``hist_max`` distinct values is summarised per open node as a histogram
    over its value codes (one pass over the rows); any other feature is
    walked in its global sort order while a row -> node map routes rows to
    their node's running sums. Candidates are the midpoints between adjacent
    distinct values present in the node either way, so the tree matches
    :func:`grow` with ``per_level=True`` up to float summation order (nodes
    are numbered breadth-first instead). Child sums come from the winning
    split's left side, the right side by subtraction.
    """
    n, d = X.shape
    s = stats.shape[1]
    m = 0
    for r in range(n):
        if w[r] > 0:
            m += 1
    cap = 2 * max(m, 1) + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    node_stats = np.zeros((cap, s))
    node_weight = np.zeros(cap)
    node_gain = np.zeros(cap)
    depth_of = np.zeros(cap, dtype=np.int64)

    # every row is routed (out-of-sample rows with zero weight too) so the
    # caller gets leaf ids for free; leaf_of[r] is set once r's node closes
    node_of = np.zeros(n, dtype=np.int64)
    leaf_of = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = perm[0, i]
        if w[r] > 0:
            node_weight[0] += w[r]
            for k in range(s):
                node_stats[0, k] += stats[r, k]
    n_nodes = 1
    level = np.zeros(1, dtype=np.int64)
    slot_of = np.full(cap, -1, dtype=np.int64)
    rslot = np.full(n, -1, dtype=np.int64)
    SL = np.empty(s)
    SR = np.empty(s)
    depth = 0
    while level.shape[0] > 0 and depth < max_depth:
        n_open = 0
        for node in level:
            W = node_weight[node]
            if W < min_split or W < 2 * min_leaf:
                continue
            if criterion == GINI:
                mx = 0.0
                for k in range(n_gain):
                    if node_stats[node, k] > mx:
                        mx = node_stats[node, k]
                if mx >= W:
                    continue
            slot_of[node] = n_open
            n_open += 1
        if n_open == 0:
            break
        open_nodes = np.empty(n_open, dtype=np.int64)
        for node in level:
            if slot_of[node] >= 0:
                open_nodes[slot_of[node]] = node
        for r in range(n):
            node = node_of[r]
            rslot[r] = slot_of[node] if node >= 0 and w[r] > 0 else -1
        parent_term = np.empty(n_open)
        for j in range(n_open):
            node = open_nodes[j]
            parent_term[j] = _parent_term(criterion, node_stats[node], node_weight[node], n_gain, lam)
        best_gain = np.full(n_open, -np.inf)
        best_f = np.full(n_open, -1, dtype=np.int64)
        best_thr = np.zeros(n_open)
        best_SL = np.zeros((n_open, s))
        best_WL = np.zeros(n_open)

        feats = feature_permutation(seed, depth, d)[:min(n_draw, d)]
        n_hist = 0
        max_bins = 0
        for f in feats:
            if n_unique[f] <= hist_max:
                n_hist += 1
                max_bins = max(max_bins, n_unique[f])
        if n_open * n_hist * max_bins * (s + 1) > 4_000_000:
            n_hist = 0  # too many open nodes for histograms; scan instead
        hist_f = np.empty(n_hist, dtype=np.int64)
        scan_f = np.empty(feats.shape[0] - n_hist, dtype=np.int64)
        a = 0
        b = 0
        for f in feats:
            if n_hist > 0 and n_unique[f] <= hist_max:
                hist_f[a] = f
                a += 1
            else:
                scan_f[b] = f
                b += 1

        if n_hist > 0:
            hist = np.zeros((n_open, n_hist, max_bins, s + 1))
            _accumulate_hist(codes, rslot, stats, w, hist_f, hist)
            for j in range(n_open):
                node = open_nodes[j]
                W = node_weight[node]
                for q in range(n_hist):
                    f = hist_f[q]
                    for k in range(s):
                        SL[k] = 0.0
                    WL = 0.0
                    prev = -1
                    for c in range(n_unique[f]):
                        if hist[j, q, c, s] == 0.0:
                            continue
                        if prev >= 0:
                            lo = uvals[f, prev]
                            hi = uvals[f, c]
                            WR = W - WL
                            if WL >= min_leaf and WR >= min_leaf and (
                                    not use_cuts or _has_cut(cuts[f], n_cuts[f], lo, hi)):
                                for k in range(s):
                                    SR[k] = node_stats[node, k] - SL[k]
                                if _hess_ok(criterion, SL, SR, min_hess):
                                    g = _gain(criterion, SL, WL, SR, WR, parent_term[j], n_gain, lam, gamma)
                                    _offer(j, f, g, lo, hi, SL, WL, best_gain, best_f, best_thr,
                                           best_SL, best_WL)
                        for k in range(s):
                            SL[k] += hist[j, q, c, k]
                        WL += hist[j, q, c, s]
                        prev = c

        if scan_f.shape[0] > 0:
            accS = np.zeros((n_open, s))
            accW = np.zeros(n_open)
            last_v = np.zeros(n_open)
            seen = np.zeros(n_open, dtype=np.bool_)
            for f in scan_f:
                accS[:, :] = 0.0
                accW[:] = 0.0
                seen[:] = False
                for i in range(n):
                    r = perm[f, i]
                    j = rslot[r]
                    if j < 0:
                        continue
                    v = X[r, f]
                    if seen[j] and v > last_v[j]:
                        node = open_nodes[j]
                        WL = accW[j]
                        WR = node_weight[node] - WL
                        if WL >= min_leaf and WR >= min_leaf and (
                                not use_cuts or _has_cut(cuts[f], n_cuts[f], last_v[j], v)):
                            for k in range(s):
                                SL[k] = accS[j, k]
                                SR[k] = node_stats[node, k] - SL[k]
                            if _hess_ok(criterion, SL, SR, min_hess):
                                g = _gain(criterion, SL, WL, SR, WR, parent_term[j], n_gain, lam, gamma)
                                _offer(j, f, g, last_v[j], v, SL, WL, best_gain, best_f, best_thr,
                                       best_SL, best_WL)
                    if s == 2:
                        accS[j, 0] += stats[r, 0]
                        accS[j, 1] += stats[r, 1]
                    else:
                        for k in range(s):
                            accS[j, k] += stats[r, k]
                    accW[j] += w[r]
                    last_v[j] = v
                    seen[j] = True

        n_split = 0
        for j in range(n_open):
            if best_f[j] >= 0 and (criterion == GINI or best_gain[j] > 0.0):
                n_split += 1
        next_level = np.empty(2 * n_split, dtype=np.int64)
        t = 0
        for j in range(n_open):
            node = open_nodes[j]
            if best_f[j] >= 0 and (criterion == GINI or best_gain[j] > 0.0):
                li = n_nodes
                ri = n_nodes + 1
                feature[node] = best_f[j]
                threshold[node] = best_thr[j]
                node_gain[node] = best_gain[j]
                left[node] = li
                right[node] = ri
                depth_of[li] = depth + 1
                depth_of[ri] = depth + 1
                for k in range(s):
                    node_stats[li, k] = best_SL[j, k]
                    node_stats[ri, k] = node_stats[node, k] - best_SL[j, k]
                node_weight[li] = best_WL[j]
                node_weight[ri] = node_weight[node] - best_WL[j]
                next_level[t] = li
                next_level[t + 1] = ri
                t += 2
                n_nodes += 2
        # route rows; rows that end in a leaf drop out of later levels
        for r in range(n):
            node = node_of[r]
            if node < 0:
                continue
            f = feature[node]
            if f < 0:
                leaf_of[r] = node
                node_of[r] = -1
            elif X[r, f] <= threshold[node]:
                node_of[r] = left[node]
            else:
                node_of[r] = right[node]
        for node in level:
            slot_of[node] = -1
        level = next_level
        depth += 1
    for r in range(n):
        if node_of[r] >= 0:
            leaf_of[r] = node_of[r]

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
            node_stats[:n_nodes], node_weight[:n_nodes], node_gain[:n_nodes], depth_of[:n_nodes],
            leaf_of)


@njit(cache=True)
def subsample_mask(seed, n, k):
    """0/1 weights marking k rows drawn uniformly without replacement.

    Partial Fisher-Yates over ``range(n)`` driven by splitmix64.
    """
    idx = np.arange(n)
    state = _mix64(np.uint64(seed) + _GOLDEN)
    for i in range(k):
        state = state + _GOLDEN
        r = _mix64(state)
        j = i + np.int64((r >> np.uint64(11)) % np.uint64(n - i))
        tmp = idx[i]
        idx[i] = idx[j]
        idx[j] = tmp
    out = np.zeros(n)
    for i in range(k):
        out[idx[i]] = 1.0
    return out


@njit(cache=True)
def stream_seed(seed, key):
    """63-bit child seed of ``seed`` for integer ``key``."""
    z = _mix64(np.uint64(seed) ^ _mix64(np.uint64(key) * _GOLDEN + np.uint64(1)))
    return np.int64(z >> np.uint64(1))

"""Compiled numerical kernels (numba).

Hot loops only: Burg recursion, regression-tree growth, and forest traversal.
Everything here is deterministic — the tree kernels consume splitmix64 streams
(see `rng`) and perform no allocation inside the per-node loops. Compiled with
exact IEEE semantics (no fastmath) so results are bit-reproducible across runs
and process counts.

Tree-growth draw order, per tree: n bootstrap draws first, then the
feature-subset draws for each node in creation order (depth-first, left child
first). Thresholds fall at midpoints between consecutive distinct sorted
values; ties on gain resolve to the lowest feature index, then the lowest
threshold. A node is terminal when its size is at most `min_leaf`, its target
variance is zero, or no candidate split strictly improves the summed child
squared error.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True)
def mix64_kernel(z):
    """Exposed for parity tests against the pure-python reference."""
    return _mix64(U64(z))


@njit(cache=True)
def bootstrap_counts(seed, n, counts):
    """Fill `counts` with the bootstrap multiplicities a tree seeded with
    `seed` would draw over n instances. Returns the stream state afterwards."""
    state = U64(seed)
    n_u = U64(n)
    for i in range(n):
        counts[i] = 0
    for _ in range(n):
        state = state + _GOLDEN
        u = _mix64(state)
        counts[np.int64(u % n_u)] += 1
    return state


@njit(cache=True)
def burg(x, order):
    """Burg maximum-entropy AR fit.

    Model convention: x[t] ~ -sum_k a[k] * x[t-k-1]; returns (a, gain) where
    gain is the final prediction-error power. E_0 is the mean square of x and
    each stage multiplies by (1 - k^2), so gain >= 0 and the filter is stable
    (all |reflection coefficients| <= 1 by Cauchy-Schwarz).
    """
    n = x.shape[0]
    f = x.copy()
    b = x.copy()
    a = np.zeros(order)
    prev = np.zeros(order)
    e = 0.0
    for i in range(n):
        e += x[i] * x[i]
    e /= n
    for m in range(1, order + 1):
        num = 0.0
        den = 0.0
        for i in range(m, n):
            fv = f[i]
            bv = b[i - 1]
            num += fv * bv
            den += fv * fv + bv * bv
        if den <= 0.0:
            break
        k = -2.0 * num / den
        # update error sequences in place, reading pre-update values
        for i in range(n - 1, m - 1, -1):
            fv = f[i]
            bv = b[i - 1]
            f[i] = fv + k * bv
            b[i] = bv + k * fv
        for i in range(m - 1):
            prev[i] = a[i]
        for i in range(m - 1):
            a[i] = prev[i] + k * prev[m - 2 - i]
        a[m - 1] = k
        e *= 1.0 - k * k
    return a, e


@njit(cache=True)
def _grow_tree(y, XT, sorted_pos, inv, seed, n, d, max_features, min_leaf,
               max_depth, feat, thr, left, right, value,
               counts, lists, bufp, side, stack, pool, cand):
    """Grow one tree into the supplied node arrays; returns the node count.

    Works on presorted per-feature position lists: the bootstrap multiset is
    expanded in sorted order once, and node partitions rewrite each feature's
    segment stably, so no sorting happens inside nodes.
    """
    n_u = U64(n)
    state = U64(seed)
    for i in range(n):
        counts[i] = 0
    for _ in range(n):
        state = state + _GOLDEN
        u = _mix64(state)
        counts[np.int64(u % n_u)] += 1

    for fidx in range(d):
        pos = 0
        for j in range(n):
            p = sorted_pos[fidx, j]
            c = counts[p]
            for _ in range(c):
                lists[fidx, pos] = p
                pos += 1

    k_feats = max_features if max_features < d else d

    n_nodes = 1
    sp = 1
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = stack[sp, 3]
        m = end - start

        ysum = 0.0
        ysq = 0.0
        for j in range(start, end):
            v = y[lists[0, j]]
            ysum += v
            ysq += v * v
        mean = ysum / m
        value[node] = mean
        sse = ysq - ysum * mean

        if m <= min_leaf or sse <= 0.0 or (max_depth >= 0 and depth >= max_depth):
            feat[node] = -1
            continue

        for fidx in range(d):
            pool[fidx] = fidx
        for j in range(k_feats):
            state = state + _GOLDEN
            u = _mix64(state)
            r = j + np.int64(u % U64(d - j))
            tmp = pool[j]
            pool[j] = pool[r]
            pool[r] = tmp
            cand[j] = pool[j]

        base_g = ysum * ysum * inv[m]
        best_g = base_g
        best_f = -1
        best_t = 0.0
        for ci in range(k_feats):
            fidx = cand[ci]
            cum = 0.0
            nl = 0
            for j in range(start, end - 1):
                p = lists[fidx, j]
                cum += y[p]
                nl += 1
                v = XT[fidx, p]
                vnext = XT[fidx, lists[fidx, j + 1]]
                if vnext > v:
                    rest = ysum - cum
                    g = cum * cum * inv[nl] + rest * rest * inv[m - nl]
                    if g > best_g:
                        best_g = g
                        best_f = fidx
                        best_t = v + 0.5 * (vnext - v)
                    elif g == best_g and best_f >= 0:
                        t = v + 0.5 * (vnext - v)
                        if fidx < best_f or (fidx == best_f and t < best_t):
                            best_f = fidx
                            best_t = t
        if best_f < 0:
            feat[node] = -1
            continue

        nl = 0
        for j in range(start, end):
            p = lists[best_f, j]
            if XT[best_f, p] <= best_t:
                side[p] = 1
                nl += 1
            else:
                side[p] = 0

        for fidx in range(d):
            lo = start
            hi = 0
            for j in range(start, end):
                p = lists[fidx, j]
                if side[p] == 1:
                    lists[fidx, lo] = p
                    lo += 1
                else:
                    bufp[hi] = p
                    hi += 1
            for j in range(hi):
                lists[fidx, lo + j] = bufp[j]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feat[node] = best_f
        thr[node] = best_t
        left[node] = lid
        right[node] = rid
        stack[sp, 0] = rid
        stack[sp, 1] = start + nl
        stack[sp, 2] = end
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = lid
        stack[sp, 1] = start
        stack[sp, 2] = start + nl
        stack[sp, 3] = depth + 1
        sp += 1
    return n_nodes


@njit(cache=True)
def grow_forest(XT, y, sorted_pos, seeds, max_features, min_leaf, max_depth):
    """Grow all trees of a forest; returns packed node arrays plus offsets.

    Node ids inside each tree are relative to that tree's offset. Workspaces
    are allocated once and reused across trees.
    """
    d, n = XT.shape
    n_trees = seeds.shape[0]
    cap_tree = 2 * n + 1
    cap = n_trees * cap_tree
    feat = np.empty(cap, np.int32)
    thr = np.zeros(cap, np.float64)
    left = np.zeros(cap, np.int32)
    right = np.zeros(cap, np.int32)
    value = np.empty(cap, np.float64)
    offsets = np.empty(n_trees + 1, np.int64)

    counts = np.empty(n, np.int32)
    lists = np.empty((d, n), np.int32)
    bufp = np.empty(n, np.int32)
    side = np.empty(n, np.uint8)
    stack = np.empty((cap_tree + 1, 4), np.int64)
    pool = np.empty(d, np.int64)
    k_feats = max_features if max_features < d else d
    cand = np.empty(k_feats, np.int64)
    inv = np.empty(n + 1, np.float64)
    inv[0] = 0.0
    for i in range(1, n + 1):
        inv[i] = 1.0 / i

    pos = 0
    offsets[0] = 0
    for t in range(n_trees):
        nn = _grow_tree(y, XT, sorted_pos, inv, seeds[t], n, d,
                        max_features, min_leaf, max_depth,
                        feat[pos:], thr[pos:], left[pos:], right[pos:],
                        value[pos:], counts, lists, bufp, side, stack,
                        pool, cand)
        pos += nn
        offsets[t + 1] = pos
    return feat[:pos].copy(), thr[:pos].copy(), left[:pos].copy(), \
        right[:pos].copy(), value[:pos].copy(), offsets


@njit(cache=True)
def forest_predict(X, feat, thr, left, right, value, offsets, out):
    """Mean over per-tree leaf values, written into `out` (length len(X))."""
    n_trees = offsets.shape[0] - 1
    m = X.shape[0]
    for i in range(m):
        acc = 0.0
        for t in range(n_trees):
            base = offsets[t]
            node = 0
            while feat[base + node] >= 0:
                if X[i, feat[base + node]] <= thr[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            acc += value[base + node]
        out[i] = acc / n_trees


@njit(cache=True)
def forest_predict_per_tree(X, feat, thr, left, right, value, offsets, out):
    """Per-tree predictions into `out` of shape (n_trees, len(X))."""
    n_trees = offsets.shape[0] - 1
    m = X.shape[0]
    for t in range(n_trees):
        base = offsets[t]
        for i in range(m):
            node = 0
            while feat[base + node] >= 0:
                if X[i, feat[base + node]] <= thr[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            out[t, i] = value[base + node]

"""CART trees and bagged forests.

Classification trees split on Gini impurity, regression trees on variance
reduction. Numerical splits sit at midpoints between consecutive distinct
values; categorical splits send one level left and the rest right. The best
split wins; ties go to the lowest column index, then the lowest split point.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .._rng import derive_seed, rng

_NO_LIMIT = 1 << 30


@njit(cache=True, nogil=True)
def _choose_features(p, mtry):
    if mtry >= p:
        return np.arange(p)
    pool = np.arange(p)
    for i in range(mtry):
        j = i + np.random.randint(p - i)
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:mtry])


@njit(cache=True, nogil=True)
def _build(X, is_cat, n_levels, y_cls, y_reg, n_classes, classify,
           rows, max_depth, min_leaf, mtry, seed):
    np.random.seed(seed)
    n_total = rows.shape[0]
    p = X.shape[1]
    cap = 2 * n_total + 1
    n_out = n_classes if classify else 1
    feature = np.full(cap, -1, np.int64)
    thresh = np.zeros(cap)
    cat_split = np.zeros(cap, np.bool_)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros((cap, n_out))

    # stack of (node id, start, end, depth) over a shared index buffer
    idx = rows.copy()
    stack = np.zeros((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_total
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    counts = np.zeros(n_classes)
    while top > 0:
        top -= 1
        node = stack[top, 0]
        s = stack[top, 1]
        e = stack[top, 2]
        depth = stack[top, 3]
        n = e - s
        pure = True
        if classify:
            counts[:] = 0.0
            for t in range(s, e):
                counts[y_cls[idx[t]]] += 1.0
            for c in range(n_classes):
                value[node, c] = counts[c] / n
                if counts[c] > 0 and counts[c] < n:
                    pure = False
            parent_score = 0.0
            for c in range(n_classes):
                parent_score += counts[c] * counts[c]
            parent_score /= n
        else:
            mean = 0.0
            for t in range(s, e):
                mean += y_reg[idx[t]]
            mean /= n
            value[node, 0] = mean
            sst = 0.0
            y0 = y_reg[idx[s]]
            for t in range(s, e):
                r = y_reg[idx[t]] - mean
                sst += r * r
                if y_reg[idx[t]] != y0:
                    pure = False
        if pure or depth >= max_depth or n < 2 * min_leaf:
            continue

        best_score = -1.0
        best_f = -1
        best_t = 0.0
        best_cat = False
        feats = _choose_features(p, mtry)
        for fi in range(feats.shape[0]):
            f = feats[fi]
            if is_cat[f]:
                L = n_levels[f]
                if classify:
                    lc = np.zeros((L, n_classes))
                    for t in range(s, e):
                        lc[np.int64(X[idx[t], f]), y_cls[idx[t]]] += 1.0
                    for lv in range(L):
                        nl = 0.0
                        for c in range(n_classes):
                            nl += lc[lv, c]
                        nr = n - nl
                        if nl < min_leaf or nr < min_leaf:
                            continue
                        sl = 0.0
                        sr = 0.0
                        for c in range(n_classes):
                            a = lc[lv, c]
                            b = counts[c] - a
                            sl += a * a
                            sr += b * b
                        score = sl / nl + sr / nr - parent_score
                        if score > best_score:
                            best_score = score
                            best_f = f
                            best_t = lv
                            best_cat = True
                else:
                    ls = np.zeros(L)
                    ln = np.zeros(L)
                    for t in range(s, e):
                        lv = np.int64(X[idx[t], f])
                        ls[lv] += y_reg[idx[t]] - mean
                        ln[lv] += 1.0
                    for lv in range(L):
                        nl = ln[lv]
                        nr = n - nl
                        if nl < min_leaf or nr < min_leaf:
                            continue
                        score = ls[lv] * ls[lv] * (1.0 / nl + 1.0 / nr)
                        if score > best_score:
                            best_score = score
                            best_f = f
                            best_t = lv
                            best_cat = True
            else:
                xs = np.empty(n)
                for t in range(n):
                    xs[t] = X[idx[s + t], f]
                order = np.argsort(xs, kind="mergesort")
                if classify:
                    cl = np.zeros(n_classes)
                    for t in range(n - 1):
                        cl[y_cls[idx[s + order[t]]]] += 1.0
                        nl = t + 1.0
                        nr = n - nl
                        a = xs[order[t]]
                        b = xs[order[t + 1]]
                        if a == b or nl < min_leaf or nr < min_leaf:
                            continue
                        sl = 0.0
                        sr = 0.0
                        for c in range(n_classes):
                            u = cl[c]
                            v = counts[c] - u
                            sl += u * u
                            sr += v * v
                        score = sl / nl + sr / nr - parent_score
                        if score > best_score:
                            best_score = score
                            best_f = f
                            mid = 0.5 * (a + b)
                            best_t = mid if mid < b else a
                            best_cat = False
                else:
                    sl = 0.0
                    for t in range(n - 1):
                        sl += y_reg[idx[s + order[t]]] - mean
                        nl = t + 1.0
                        nr = n - nl
                        a = xs[order[t]]
                        b = xs[order[t + 1]]
                        if a == b or nl < min_leaf or nr < min_leaf:
                            continue
                        score = sl * sl * (1.0 / nl + 1.0 / nr)
                        if score > best_score:
                            best_score = score
                            best_f = f
                            mid = 0.5 * (a + b)
                            best_t = mid if mid < b else a
                            best_cat = False

        if best_f < 0:
            continue
        if classify:
            if best_score <= 1e-12 * n:
                continue
        elif best_score <= 1e-12 * sst:
            continue

        # partition idx[s:e] in place, stable
        buf = idx[s:e].copy()
        k = s
        for t in range(n):
            x = X[buf[t], best_f]
            go_left = (x == best_t) if best_cat else (x <= best_t)
            if go_left:
                idx[k] = buf[t]
                k += 1
        mid_pos = k
        for t in range(n):
            x = X[buf[t], best_f]
            go_left = (x == best_t) if best_cat else (x <= best_t)
            if not go_left:
                idx[k] = buf[t]
                k += 1

        feature[node] = best_f
        thresh[node] = best_t
        cat_split[node] = best_cat
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid
        # push right first so the left subtree is built first
        stack[top, 0] = rid
        stack[top, 1] = mid_pos
        stack[top, 2] = e
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lid
        stack[top, 1] = s
        stack[top, 2] = mid_pos
        stack[top, 3] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), thresh[:n_nodes].copy(), cat_split[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True, nogil=True)
def _apply(X, feature, thresh, cat_split, left, right):
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            x = X[i, feature[node]]
            if cat_split[node]:
                go_left = x == thresh[node]
            else:
                go_left = x <= thresh[node]
            node = left[node] if go_left else right[node]
        out[i] = node
    return out


@dataclass(frozen=True, eq=False)
class TreeModel:
    """Flat array tree. ``feature[i] == -1`` marks a leaf; ``value[i]`` holds
    the class distribution (classification) or the mean (regression)."""

    feature: np.ndarray
    threshold: np.ndarray
    categorical_split: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    classify: bool
    max_depth: int | None
    min_leaf: int

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def leaves(self, X):
        return _apply(np.ascontiguousarray(X, dtype=np.float64), self.feature,
                      self.threshold, self.categorical_split, self.left, self.right)

    def same_as(self, other):
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("feature", "threshold", "categorical_split", "left", "right", "value"))


def _prepare(X, is_categorical, n_levels):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if np.isnan(X).any():
        raise ValueError("tree features must be complete")
    p = X.shape[1]
    is_cat = np.zeros(p, np.bool_) if is_categorical is None else np.asarray(is_categorical, np.bool_)
    if n_levels is None:
        n_levels = np.where(is_cat, X.max(axis=0, initial=0) + 1, 0)
    return X, is_cat, np.asarray(n_levels, np.int64)


def fit_tree(X, y, *, classify=True, n_classes=None, is_categorical=None, n_levels=None,
             max_depth=None, min_leaf=1, mtry=None, seed=0, rows=None):
    """Grow one CART tree on ``X`` (complete, categoricals as level indices).

    ``rows`` optionally lists training row indices (duplicates allowed, as
    in a bootstrap sample). ``mtry`` features are redrawn at every node.
    """
    X, is_cat, n_levels = _prepare(X, is_categorical, n_levels)
    rows = np.arange(X.shape[0]) if rows is None else np.asarray(rows, np.int64)
    if rows.size == 0:
        raise ValueError("empty training set")
    p = X.shape[1]
    mtry = p if mtry is None else max(1, min(int(mtry), p))
    if classify:
        y_cls = np.asarray(y, np.int64)
        if n_classes is None:
            n_classes = int(y_cls.max()) + 1
        y_reg = np.zeros(1)
    else:
        y_reg = np.asarray(y, np.float64)
        y_cls = np.zeros(1, np.int64)
        n_classes = 1
    depth = _NO_LIMIT if max_depth is None else int(max_depth)
    parts = _build(X, is_cat, n_levels, y_cls, y_reg, int(n_classes), bool(classify),
                   rows, depth, int(min_leaf), mtry, int(seed) & 0xFFFFFFFF)
    return TreeModel(*parts, classify=bool(classify), max_depth=max_depth, min_leaf=int(min_leaf))


def predict_tree(model, X):
    """Return ``(labels, probabilities)`` for classification trees and
    ``(predictions, None)`` for regression trees."""
    leaf = model.leaves(X)
    if model.classify:
        proba = model.value[leaf]
        return np.argmax(proba, axis=1), proba
    return model.value[leaf, 0], None


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    n_trees: int
    mtry: int
    per_tree_seeds: tuple
    classify: bool
    n_classes: int


def default_mtry(p, classify=True):
    return max(1, math.ceil(math.sqrt(p)))


def fit_forest(X, y, *, classify=True, n_classes=None, is_categorical=None, n_levels=None,
               n_trees=100, mtry=None, min_leaf=None, max_depth=None, seed=0,
               bootstrap=True, threads=1):
    """Bagged CART ensemble. Tree ``t`` uses a seed derived from (seed, t),
    so any thread count yields the same forest."""
    X, is_cat, n_levels = _prepare(X, is_categorical, n_levels)
    n, p = X.shape
    if n == 0:
        raise ValueError("empty training set")
    if classify:
        y = np.asarray(y, np.int64)
        n_classes = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if mtry is None:
        mtry = default_mtry(p)
    mtry = max(1, min(int(mtry), p))
    if min_leaf is None:
        min_leaf = 1 if classify else 5
    seeds = tuple(derive_seed(seed, "tree", t) for t in range(n_trees))

    def grow(t):
        rows = rng(seeds[t], "bootstrap").integers(0, n, n) if bootstrap else None
        return fit_tree(X, y, classify=classify, n_classes=n_classes, is_categorical=is_cat,
                        n_levels=n_levels, max_depth=max_depth, min_leaf=min_leaf,
                        mtry=mtry, seed=seeds[t], rows=rows)

    if threads > 1 and n_trees > 1:
        with ThreadPoolExecutor(threads) as pool:
            trees = tuple(pool.map(grow, range(n_trees)))
    else:
        trees = tuple(grow(t) for t in range(n_trees))
    return ForestModel(trees, n_trees, mtry, seeds, bool(classify), int(n_classes or 1))


def predict_forest(model, X):
    """Majority vote (classification) or mean (regression).

    Returns ``(labels, vote_fractions)`` or ``(predictions, None)``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if model.classify:
        votes = np.zeros((X.shape[0], model.n_classes))
        rows = np.arange(X.shape[0])
        for tree in model.trees:
            label, _ = predict_tree(tree, X)
            votes[rows, label] += 1.0
        proba = votes / model.n_trees
        return np.argmax(proba, axis=1), proba
    pred = np.zeros(X.shape[0])
    for tree in model.trees:
        pred += predict_tree(tree, X)[0]
    return pred / model.n_trees, None

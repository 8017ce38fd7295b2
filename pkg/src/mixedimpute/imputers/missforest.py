"""Iterative random-forest imputation (missForest procedure)."""

import numpy as np

from .._rng import derive_seed
from ..learners.tree import fit_forest, predict_forest
from .simple import mean_mode


def _sweep(block, Xc, order, n_trees, sweep):
    for j in order:
        train = block.fit & block.M[:, j]
        target = ~block.M[:, j]
        others = [c for c in range(Xc.shape[1]) if c != j]
        if not others:
            continue
        classify = bool(block.is_cat[j])
        y = block.X[train, j]
        model = fit_forest(
            Xc[train][:, others], y.astype(np.int64) if classify else y,
            classify=classify, n_classes=int(block.n_levels[j]) if classify else None,
            is_categorical=block.is_cat[others], n_levels=block.n_levels[others],
            n_trees=n_trees, seed=derive_seed(block.seed, "missforest", sweep, j),
            threads=block.threads)
        Xc[target, j] = predict_forest(model, Xc[target][:, others])[0]


def missforest(block, n_trees, max_iter):
    """Sweep forests over incomplete columns until the numerical change
    (sum of squared differences over sum of squares) and the categorical
    change (fraction of imputed cells flipped) both grow, or ``max_iter``.
    Stopping on growth returns the previous sweep's completion.
    """
    Xc = mean_mode(block)
    order = block.incomplete_columns()
    miss = ~block.M
    num = ~block.is_cat
    n_cat_missing = miss[:, block.is_cat].sum()
    has_num = miss[:, num].any()
    has_cat = n_cat_missing > 0
    prev_dn = prev_df = np.inf
    trace = []
    for sweep in range(max_iter):
        old = Xc.copy()
        _sweep(block, Xc, order, n_trees, sweep)
        dn = df = np.nan
        if has_num:
            denom = np.sum(Xc[:, num] ** 2)
            dn = np.sum((Xc[:, num] - old[:, num]) ** 2) / denom if denom > 0 else 0.0
            trace.append((sweep, "delta_numerical", dn))
        if has_cat:
            df = np.sum(Xc[:, block.is_cat] != old[:, block.is_cat]) / n_cat_missing
            trace.append((sweep, "delta_categorical", df))
        grew_n = (not has_num) or dn >= prev_dn
        grew_f = (not has_cat) or df >= prev_df
        if sweep > 0 and grew_n and grew_f:
            trace.append((sweep, "stopped_on_increase", 1.0))
            return old, trace
        prev_dn, prev_df = dn, df
    return Xc, trace

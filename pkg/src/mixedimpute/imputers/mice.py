"""Multiple imputation by chained equations."""

import numpy as np

from .._rng import rng
from ..errors import DegenerateDataError
from ..learners.linear import fit_logistic_ovr, fit_ridge, predict_logistic_ovr, predict_ridge
from .simple import mean_mode

RIDGE_L2 = 1e-4
LOGISTIC_KW = dict(l2=1.0, max_iter=50, tol=1e-6)


def _draw_levels(proba, u):
    cum = np.cumsum(proba, axis=1)
    return np.minimum((cum < u[:, None] * cum[:, -1:]).sum(axis=1), proba.shape[1] - 1)


def _update_column(block, Xc, j, noise, g):
    train = block.fit & block.M[:, j]
    target = ~block.M[:, j]
    others = [c for c in range(Xc.shape[1]) if c != j]
    y = block.X[train, j]
    A, B = Xc[train][:, others], Xc[target][:, others]
    is_cat, n_levels = block.is_cat[others], block.n_levels[others]
    n_target = int(target.sum())

    if not block.is_cat[j]:
        if others:
            model = fit_ridge(A, y, is_cat, n_levels, l2=RIDGE_L2)
            pred = predict_ridge(model, B)
            resid = y - predict_ridge(model, A)
            dof = max(y.size - 1 - model.weights.size, 1)
        else:
            pred = np.full(n_target, y.mean())
            resid = y - y.mean()
            dof = max(y.size - 1, 1)
        if noise:
            pred = pred + g.normal(0.0, np.sqrt(resid @ resid / dof), n_target)
        Xc[target, j] = pred
        return

    L = int(block.n_levels[j])
    labels = y.astype(np.int64)
    if others:
        try:
            model = fit_logistic_ovr(A, labels, L, is_cat, n_levels, **LOGISTIC_KW)
            proba = predict_logistic_ovr(model, B)[1]
        except DegenerateDataError:
            proba = None
    else:
        proba = None
    if proba is None:
        freq = np.bincount(labels, minlength=L).astype(float)
        proba = np.tile(freq / freq.sum(), (n_target, 1))
    if noise:
        Xc[target, j] = _draw_levels(proba, g.random(n_target))
    else:
        Xc[target, j] = np.argmax(proba, axis=1)


def mice(block, m, iterations, noise):
    """Return ``m`` completed arrays and a diagnostics trace.

    Each completion starts from mean/mode fill and cycles ``iterations``
    times over the incomplete columns (fewest missing first). Numerical
    columns use ridge regression, categorical columns one-vs-rest logistic;
    with ``noise`` the prediction is perturbed by a residual-scale Gaussian
    or replaced by a draw from the class probabilities.
    """
    start = mean_mode(block)
    order = block.incomplete_columns()
    completions, trace = [], []
    for c in range(m):
        g = rng(block.seed, "mice", c)
        Xc = start.copy()
        for it in range(iterations):
            for j in order:
                _update_column(block, Xc, j, noise, g)
        completions.append(Xc)
        trace.append((c, "mice_cycles", float(iterations)))
    return completions, trace

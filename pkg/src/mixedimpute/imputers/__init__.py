"""Imputation engines behind a single ``impute`` entry point."""

import numpy as np

from ..errors import DegenerateDataError
from .base import METHODS, Block, ImputationResult, ImputerSpec
from .em import conditional_mean, em_gaussian, em_impute
from .knn import knn_fill
from .mice import mice
from .missforest import missforest
from .simple import mean_mode, random_draw

__all__ = ["METHODS", "ImputerSpec", "ImputationResult", "impute",
           "conditional_mean", "em_gaussian"]


def impute(table, spec, fit_rows=None, audit=False, threads=1):
    """Complete every missing feature cell of ``table``.

    ``fit_rows`` (bool mask or index array) restricts which rows supply
    means, donors and training data; all rows are filled. Label and
    identifier columns pass through untouched. With ``audit`` the KNN
    method records donor rows per imputed cell.
    """
    feats = table.feature_indices
    n = table.n_rows
    fit = np.ones(n, dtype=bool)
    if fit_rows is not None:
        fit_rows = np.asarray(fit_rows)
        if fit_rows.dtype == bool:
            fit = fit_rows.copy()
        else:
            fit = np.zeros(n, dtype=bool)
            fit[fit_rows] = True

    M = table.mask[:, feats]
    empty = [table.schema[feats[j]].name for j in np.flatnonzero(~M[fit].any(axis=0))]
    if empty:
        raise DegenerateDataError("all-missing-column", f"no observed values in {empty}")
    if M.all():
        return ImputationResult((table,) * spec.n_completions)

    block = Block(
        X=table.values[:, feats].copy(), M=M,
        is_cat=table.is_categorical[feats], n_levels=table.n_levels[feats],
        ranges=table.ranges()[feats], fit=fit,
        names=[table.schema[j].name for j in feats], seed=spec.seed, threads=threads)

    donors = {} if audit else None
    trace = []
    method = spec.method
    if method == "mean_mode":
        filled = [mean_mode(block)]
    elif method == "random":
        filled = [random_draw(block)]
    elif method == "knn":
        filled = [knn_fill(block, spec.k, donors=donors)]
    elif method == "mice":
        filled, trace = mice(block, spec.m, spec.iterations, spec.noise)
    elif method == "em":
        X, trace = em_impute(block, spec.max_iter, spec.tol)
        filled = [X]
    elif method == "missforest":
        X, trace = missforest(block, spec.n_trees, spec.max_iter)
        filled = [X]
    else:  # pragma: no cover - ImputerSpec validates the method
        raise ValueError(method)

    completions = []
    full_mask = table.mask.copy()
    full_mask[:, feats] = True
    for X in filled:
        values = np.array(table.values)
        values[:, feats] = np.where(M, table.values[:, feats], X)
        completions.append(table.with_cells(values, full_mask))
    return ImputationResult(tuple(completions), tuple(trace), donors or {})

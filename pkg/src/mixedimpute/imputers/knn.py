import numpy as np

from ..errors import DegenerateDataError
from ..learners.heom import heom_block, order_by_distance

_BLOCK = 256


def knn_fill(block, k, columns=None, donors=None, X=None, M=None):
    """Fill missing cells from the ``k`` HEOM-nearest fitting rows observed
    in the target column: mean for numericals, mode for categoricals.

    ``X``/``M`` override the values used for distances (the EM categorical
    pass measures distance on its completed numerical block). ``donors``, if
    a dict, receives ``(row, col) -> donor rows``.
    """
    X = block.X if X is None else X
    M = block.M if M is None else M
    target_cols = set(range(X.shape[1]) if columns is None else columns)
    out = X.copy()
    fit_ids = np.flatnonzero(block.fit)
    fit_vals, fit_mask = X[fit_ids], M[fit_ids]
    need = np.flatnonzero((~M[:, sorted(target_cols)]).any(axis=1)) if target_cols else []
    for start in range(0, len(need), _BLOCK):
        rows = need[start:start + _BLOCK]
        dist = heom_block(X[rows], M[rows], fit_vals, fit_mask, block.is_cat, block.ranges)
        for r, i in enumerate(rows):
            ranked = fit_ids[order_by_distance(dist[r], fit_ids)]
            ranked = ranked[ranked != i]
            for j in np.flatnonzero(~M[i]):
                if j not in target_cols:
                    continue
                nn = ranked[M[ranked, j]][:k]
                if nn.size == 0:
                    raise DegenerateDataError(
                        "no-donors", f"no donor rows observed in column {block.names[j]!r}")
                vals = X[nn, j]
                if block.is_cat[j]:
                    out[i, j] = np.argmax(np.bincount(vals.astype(np.int64),
                                                      minlength=block.n_levels[j]))
                else:
                    out[i, j] = vals.mean()
                if donors is not None:
                    donors[(int(i), block.names[j])] = tuple(int(d) for d in nn)
    return out

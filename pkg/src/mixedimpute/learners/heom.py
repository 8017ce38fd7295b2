"""Heterogeneous Euclidean-Overlap Metric and exact k-nearest-neighbour search."""

import math
from typing import NamedTuple

import numpy as np

from ..errors import DegenerateDataError


class Neighbor(NamedTuple):
    row: int
    distance: float


def heom_distance(a, b, schema, ranges=None):
    """HEOM between two rows given as ``(values, mask)`` pairs over ``schema``.

    A column contributes 1 when either side is missing, the 0/1 overlap for
    categoricals, and |a-b|/range for numericals (0 when range is 0).
    """
    (av, am), (bv, bm) = a, b
    total = 0.0
    for j, col in enumerate(schema):
        if not (am[j] and bm[j]):
            d = 1.0
        elif col.is_categorical:
            d = 0.0 if av[j] == bv[j] else 1.0
        else:
            r = ranges[j] if ranges is not None else (col.max - col.min)
            d = abs(float(av[j]) - float(bv[j])) / r if r > 0 else 0.0
        total += d * d
    return math.sqrt(total)


def heom_block(pv, pm, vals, mask, is_cat, ranges):
    """Distances from each probe row (rows of ``pv``) to each row of ``vals``.

    Squared terms are accumulated column by column in index order, so the
    result is bit-identical to :func:`heom_distance`.
    """
    pv = np.atleast_2d(pv)
    pm = np.atleast_2d(pm)
    acc = np.zeros((pv.shape[0], vals.shape[0]))
    for j in range(vals.shape[1]):
        both = pm[:, j, None] & mask[None, :, j]
        if is_cat[j]:
            d = (pv[:, j, None] != vals[None, :, j]).astype(np.float64)
        elif ranges[j] > 0:
            with np.errstate(invalid="ignore"):
                d = np.abs(pv[:, j, None] - vals[None, :, j]) / ranges[j]
        else:
            d = np.zeros(acc.shape)
        d = np.where(both, d, 1.0)
        acc += d * d
    return np.sqrt(acc)


def order_by_distance(dist, ids):
    """Indices sorting candidates by (distance, row id)."""
    return np.lexsort((ids, dist))


def _feature_view(table):
    feats = table.feature_indices
    return (feats, table.values[:, feats], table.mask[:, feats],
            table.is_categorical[feats], table.ranges()[feats])


def knn_query(table, probe, k, restrict_to=None):
    """Exact ``k`` nearest rows of ``table`` to ``probe`` under HEOM.

    ``probe`` is a row index (excluded from the candidates) or a
    ``(values, mask)`` pair spanning all columns of ``table``. With
    ``restrict_to`` only rows observed in that column are candidates.
    Ties are broken by ascending row id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    feats, vals, mask, is_cat, ranges = _feature_view(table)
    candidates = np.ones(table.n_rows, dtype=bool)
    if isinstance(probe, (int, np.integer)):
        pv, pm = vals[probe], mask[probe]
        candidates[probe] = False
    else:
        pv = np.asarray(probe[0], dtype=np.float64)[feats]
        pm = np.asarray(probe[1], dtype=bool)[feats]
    if restrict_to is not None:
        candidates &= table.mask[:, table.index(restrict_to)]
    ids = np.flatnonzero(candidates)
    if ids.size == 0:
        raise DegenerateDataError("no-donors", "no candidate rows for the query")
    dist = heom_block(pv, pm, vals[ids], mask[ids], is_cat, ranges)[0]
    order = order_by_distance(dist, ids)[:k]
    return [Neighbor(int(ids[i]), float(dist[i])) for i in order]


def vote(labels, n_classes):
    """Class frequencies of ``labels``; argmax picks the lowest index on ties."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)
    return counts / counts.sum()


def knn_classify(table, probe, k):
    """Majority label among the ``k`` HEOM-nearest rows (lowest class on ties)."""
    neighbors = knn_query(table, probe, k)
    j = table.label_index
    labels = table.values[[n.row for n in neighbors], j].astype(np.int64)
    return int(np.argmax(vote(labels, table.schema[j].n_levels)))

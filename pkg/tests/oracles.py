"""Independent reference implementations used as test oracles."""

import math

import numpy as np


def heom_ref(a_vals, a_mask, b_vals, b_mask, kinds, ranges):
    """Plain-Python HEOM over parallel lists; kinds holds 'c' or 'n'."""
    s = 0.0
    for av, am, bv, bm, kind, r in zip(a_vals, a_mask, b_vals, b_mask, kinds, ranges):
        if not (am and bm):
            d = 1.0
        elif kind == "c":
            d = 0.0 if av == bv else 1.0
        else:
            d = abs(av - bv) / r if r > 0 else 0.0
        s += d * d
    return math.sqrt(s)


def knn_ref(table, probe_row, k, restrict_to=None):
    """Exhaustive neighbour list: every candidate scored, full sort on (distance, id)."""
    feats = list(table.feature_indices)
    kinds = ["c" if table.is_categorical[j] else "n" for j in feats]
    ranges = [float(table.ranges()[j]) for j in feats]
    vals = table.values.tolist()
    mask = table.mask.tolist()
    pv = [vals[probe_row][j] for j in feats]
    pm = [mask[probe_row][j] for j in feats]
    scored = []
    for i in range(table.n_rows):
        if i == probe_row:
            continue
        if restrict_to is not None and not mask[i][table.index(restrict_to)]:
            continue
        d = heom_ref(pv, pm, [vals[i][j] for j in feats], [mask[i][j] for j in feats],
                     kinds, ranges)
        scored.append((d, i))
    scored.sort()
    return [(i, d) for d, i in scored[:k]]


def knn_vote_ref(table, probe_row, k):
    neighbors = knn_ref(table, probe_row, k)
    counts = {}
    for i, _ in neighbors:
        lab = int(table.values[i, table.label_index])
        counts[lab] = counts.get(lab, 0) + 1
    best = max(counts.values())
    return min(lab for lab, c in counts.items() if c == best)


def gaussian_conditional(mu, sigma, x, observed):
    """Conditional mean of the missing block via the precision matrix,
    mu_m - inv(L_mm) L_mo (x_o - mu_o), which avoids the Sigma_oo solve used
    by the implementation."""
    lam = np.linalg.inv(sigma)
    m = ~observed
    o = observed
    return mu[m] - np.linalg.solve(lam[np.ix_(m, m)], lam[np.ix_(m, o)] @ (x[o] - mu[o]))


def gini_best_split_1d(x, y):
    """Enumerate midpoint thresholds on one numeric column; return the one
    with the largest Gini decrease (lowest threshold on ties)."""
    def gini(lab):
        if len(lab) == 0:
            return 0.0
        p = np.bincount(lab) / len(lab)
        return 1 - np.sum(p ** 2)
    xs = np.unique(x)
    best, best_t = -np.inf, None
    for a, b in zip(xs[:-1], xs[1:]):
        t = (a + b) / 2
        left, right = y[x <= t], y[x > t]
        gain = gini(y) - (len(left) * gini(left) + len(right) * gini(right)) / len(y)
        if gain > best + 1e-15:
            best, best_t = gain, t
    return best_t

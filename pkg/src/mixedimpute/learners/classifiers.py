"""Table-level classifiers used by the benchmark harness.

Each classifier is fitted on a complete feature table plus integer labels
and exposes ``predict_proba``; labels are the argmax (lowest index on ties).
"""

import numpy as np

from .bayes import fit_nb, predict_nb
from .heom import heom_block, order_by_distance
from .linear import fit_logistic_ovr, predict_logistic_ovr
from .tree import fit_forest, fit_tree, predict_forest, predict_tree


class Classifier:
    name = None

    def fit(self, table, y, n_classes, seed=0):
        raise NotImplementedError

    def predict_proba(self, table):
        raise NotImplementedError

    def predict(self, table):
        return np.argmax(self.predict_proba(table), axis=1)


class TreeClassifier(Classifier):
    name = "tree"

    def __init__(self, max_depth=None, min_leaf=1):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, table, y, n_classes, seed=0):
        self.model = fit_tree(table.values, y, n_classes=n_classes,
                              is_categorical=table.is_categorical, n_levels=table.n_levels,
                              max_depth=self.max_depth, min_leaf=self.min_leaf, seed=seed)
        return self

    def predict_proba(self, table):
        return predict_tree(self.model, table.values)[1]


class ForestClassifier(Classifier):
    name = "forest"

    def __init__(self, n_trees=100, mtry=None, min_leaf=1, threads=1):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_leaf = min_leaf
        self.threads = threads

    def fit(self, table, y, n_classes, seed=0):
        self.model = fit_forest(table.values, y, n_classes=n_classes,
                                is_categorical=table.is_categorical, n_levels=table.n_levels,
                                n_trees=self.n_trees, mtry=self.mtry, min_leaf=self.min_leaf,
                                seed=seed, threads=self.threads)
        return self

    def predict_proba(self, table):
        return predict_forest(self.model, table.values)[1]


class LogisticClassifier(Classifier):
    name = "logistic"

    def __init__(self, l2=1.0, max_iter=100, tol=1e-8):
        self.kw = dict(l2=l2, max_iter=max_iter, tol=tol)

    def fit(self, table, y, n_classes, seed=0):
        self.model = fit_logistic_ovr(table.values, y, n_classes, table.is_categorical,
                                      table.n_levels, **self.kw)
        return self

    def predict_proba(self, table):
        return predict_logistic_ovr(self.model, table.values)[1]


class NBClassifier(Classifier):
    name = "nb"

    def fit(self, table, y, n_classes, seed=0):
        self.model = fit_nb(table.values, y, n_classes, table.is_categorical, table.n_levels)
        return self

    def predict_proba(self, table):
        return predict_nb(self.model, table.values)[1]


class KNNClassifier(Classifier):
    """HEOM majority vote. Ranges come from the training table."""

    name = "knn"

    def __init__(self, k=5):
        self.k = k

    def fit(self, table, y, n_classes, seed=0):
        self.train = table
        self.y = np.asarray(y, dtype=np.int64)
        self.n_classes = n_classes
        self.ranges = table.ranges()
        return self

    def predict_proba(self, table):
        t = self.train
        ids = np.arange(t.n_rows)
        out = np.zeros((table.n_rows, self.n_classes))
        for start in range(0, table.n_rows, 256):
            stop = min(start + 256, table.n_rows)
            d = heom_block(table.values[start:stop], table.mask[start:stop],
                           t.values, t.mask, t.is_categorical, self.ranges)
            for r in range(stop - start):
                nn = order_by_distance(d[r], ids)[:self.k]
                counts = np.bincount(self.y[nn], minlength=self.n_classes)
                out[start + r] = counts / counts.sum()
        return out


CLASSIFIERS = {
    "tree": TreeClassifier,
    "forest": ForestClassifier,
    "logistic": LogisticClassifier,
    "nb": NBClassifier,
    "knn": KNNClassifier,
}


def make_classifier(name, **params):
    try:
        cls = CLASSIFIERS[name]
    except KeyError:
        raise ValueError(f"unknown classifier {name!r}; choose from {sorted(CLASSIFIERS)}") from None
    return cls(**params)

"""Mixed naive Bayes: Gaussian numericals, Laplace-smoothed categoricals."""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

SD_FLOOR = 1e-9
ALPHA = 1.0


@dataclass(frozen=True, eq=False)
class NBModel:
    priors: np.ndarray          # (n_classes,)
    means: np.ndarray           # (n_classes, p); unused for categorical columns
    sds: np.ndarray
    level_probs: tuple          # per column: (n_classes, n_levels) or None
    is_categorical: np.ndarray


def fit_nb(X, y, n_classes, is_categorical, n_levels):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    is_cat = np.asarray(is_categorical, dtype=bool)
    p = X.shape[1]
    counts = np.bincount(y, minlength=n_classes).astype(float)
    priors = counts / counts.sum()
    means = np.zeros((n_classes, p))
    sds = np.ones((n_classes, p))
    level_probs = []
    for j in range(p):
        if is_cat[j]:
            L = int(n_levels[j])
            table = np.zeros((n_classes, L))
            np.add.at(table, (y, X[:, j].astype(np.int64)), 1.0)
            level_probs.append((table + ALPHA) / (counts[:, None] + ALPHA * L))
        else:
            level_probs.append(None)
            for c in range(n_classes):
                xc = X[y == c, j]
                if xc.size:
                    means[c, j] = xc.mean()
                    sds[c, j] = max(xc.std(), SD_FLOOR)
    return NBModel(priors, means, sds, tuple(level_probs), is_cat)


def predict_nb(model, X):
    """Return ``(labels, posteriors)``; ties go to the lowest class index."""
    X = np.asarray(X, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logp = np.tile(np.log(model.priors), (X.shape[0], 1))
    for j, lp in enumerate(model.level_probs):
        if lp is not None:
            logp += np.log(lp[:, X[:, j].astype(np.int64)]).T
        else:
            z = (X[:, j, None] - model.means[None, :, j]) / model.sds[None, :, j]
            logp += -0.5 * z * z - np.log(model.sds[None, :, j]) - 0.5 * np.log(2 * np.pi)
    post = np.exp(logp - logsumexp(logp, axis=1, keepdims=True))
    return np.argmax(post, axis=1), post

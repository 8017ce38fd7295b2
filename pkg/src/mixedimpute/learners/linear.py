"""Logistic and ridge regression over one-hot / standardized encodings."""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from ..errors import DegenerateDataError


@dataclass(frozen=True, eq=False)
class Encoder:
    """Categoricals -> one-hot over all schema levels; numericals -> z-scores
    using training mean and sd (sd 0 is treated as 1)."""

    is_categorical: np.ndarray
    n_levels: np.ndarray
    means: np.ndarray
    sds: np.ndarray

    @classmethod
    def fit(cls, X, is_categorical, n_levels):
        X = np.asarray(X, dtype=np.float64)
        is_cat = np.asarray(is_categorical, dtype=bool)
        means = np.where(is_cat, 0.0, X.mean(axis=0)) if X.shape[0] else np.zeros(X.shape[1])
        sds = np.where(is_cat, 1.0, X.std(axis=0)) if X.shape[0] else np.ones(X.shape[1])
        sds = np.where(sds > 0, sds, 1.0)
        return cls(is_cat, np.asarray(n_levels, dtype=np.int64), means, sds)

    @property
    def width(self):
        return int(np.where(self.is_categorical, self.n_levels, 1).sum())

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros((X.shape[0], self.width))
        pos = 0
        rows = np.arange(X.shape[0])
        for j in range(X.shape[1]):
            if self.is_categorical[j]:
                out[rows, pos + X[:, j].astype(np.int64)] = 1.0
                pos += self.n_levels[j]
            else:
                out[:, pos] = (X[:, j] - self.means[j]) / self.sds[j]
                pos += 1
        return out


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    intercept: float
    encoder: Encoder

    def decision(self, X):
        return self.encoder.transform(X) @ self.weights + self.intercept


def logistic_objective(theta, Z, y, l2):
    """Penalized log-likelihood; ``theta = [intercept, weights...]``."""
    eta = theta[0] + Z @ theta[1:]
    ll = np.sum(y * log_expit(eta) + (1.0 - y) * log_expit(-eta))
    return ll - 0.5 * l2 * np.dot(theta[1:], theta[1:])


def logistic_gradient(theta, Z, y, l2):
    r = y - expit(theta[0] + Z @ theta[1:])
    return np.concatenate(([r.sum()], Z.T @ r - l2 * theta[1:]))


def _newton(Z, y, l2, max_iter, tol):
    theta = np.zeros(Z.shape[1] + 1)
    Z1 = np.hstack([np.ones((Z.shape[0], 1)), Z])
    penalty = np.full(theta.shape[0], l2)
    penalty[0] = 0.0
    f = logistic_objective(theta, Z, y, l2)
    for _ in range(max_iter):
        g = logistic_gradient(theta, Z, y, l2)
        p = expit(Z1 @ theta)
        H = (Z1 * (p * (1.0 - p))[:, None]).T @ Z1 + np.diag(penalty + 1e-10)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        while True:
            cand = theta + t * step
            fc = logistic_objective(cand, Z, y, l2)
            if fc >= f or t < 1e-10:
                break
            t *= 0.5
        delta = np.max(np.abs(cand - theta))
        theta, f = cand, fc
        if delta < tol:
            break
    return theta


def fit_logistic(X, y, is_categorical, n_levels, *, l2=1.0, max_iter=100, tol=1e-8):
    """Binary L2-penalized logistic regression by damped Newton from zero."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0 or np.all(y == y[0]):
        raise DegenerateDataError("degenerate-target", "logistic target has a single class")
    enc = Encoder.fit(X, is_categorical, n_levels)
    theta = _newton(enc.transform(X), y, l2, max_iter, tol)
    return LinearModel(theta[1:], float(theta[0]), enc)


def predict_logistic(model, X):
    """Return ``(labels, probabilities)`` with probabilities shaped (n, 2)."""
    p1 = expit(model.decision(X))
    proba = np.column_stack([1.0 - p1, p1])
    return np.argmax(proba, axis=1), proba


@dataclass(frozen=True, eq=False)
class OneVsRest:
    models: tuple       # per class: LinearModel, or None when the class is absent
    constant: int | None
    n_classes: int


def fit_logistic_ovr(X, y, n_classes, is_categorical, n_levels, **kw):
    """Multi-class logistic via one-vs-rest; two classes reduce to one fit."""
    y = np.asarray(y, dtype=np.int64)
    present = np.unique(y)
    if present.size == 1:
        return OneVsRest((), int(present[0]), n_classes)
    if n_classes == 2:
        return OneVsRest((fit_logistic(X, y, is_categorical, n_levels, **kw),), None, 2)
    models = tuple(fit_logistic(X, (y == c).astype(float), is_categorical, n_levels, **kw)
                   if c in present else None for c in range(n_classes))
    return OneVsRest(models, None, n_classes)


def predict_logistic_ovr(model, X):
    n = np.asarray(X).shape[0]
    if model.constant is not None:
        proba = np.zeros((n, model.n_classes))
        proba[:, model.constant] = 1.0
        return np.full(n, model.constant), proba
    if model.n_classes == 2:
        return predict_logistic(model.models[0], X)
    proba = np.zeros((n, model.n_classes))
    for c, m in enumerate(model.models):
        if m is not None:
            proba[:, c] = expit(m.decision(X))
    proba /= proba.sum(axis=1, keepdims=True)
    return np.argmax(proba, axis=1), proba


def fit_ridge(X, y, is_categorical, n_levels, *, l2=1e-4):
    """Least squares with an L2 penalty on the (encoded) slopes only."""
    y = np.asarray(y, dtype=np.float64)
    enc = Encoder.fit(X, is_categorical, n_levels)
    Z = enc.transform(X)
    zbar = Z.mean(axis=0)
    ybar = y.mean()
    Zc = Z - zbar
    A = Zc.T @ Zc + l2 * np.eye(Z.shape[1])
    w = np.linalg.solve(A, Zc.T @ (y - ybar))
    return LinearModel(w, float(ybar - zbar @ w), enc)


def predict_ridge(model, X):
    return model.decision(X)

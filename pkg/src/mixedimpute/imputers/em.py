"""EM for a multivariate Gaussian with missing entries."""

from dataclasses import dataclass

import numpy as np

from .knn import knn_fill

SIGMA_RIDGE = 1e-8
CATEGORICAL_K = 5


def conditional_mean(mu, sigma, x, observed):
    """E[x_missing | x_observed] under N(mu, sigma); observed entries kept."""
    o = np.flatnonzero(observed)
    m = np.flatnonzero(~observed)
    out = np.array(x, dtype=np.float64)
    if m.size == 0:
        return out
    if o.size == 0:
        out[m] = mu[m]
        return out
    coef = np.linalg.solve(sigma[np.ix_(o, o)], sigma[np.ix_(o, m)]).T
    out[m] = mu[m] + coef @ (out[o] - mu[o])
    return out


@dataclass(frozen=True, eq=False)
class EMResult:
    mean: np.ndarray
    cov: np.ndarray
    loglik: tuple       # observed-data log-likelihood at each parameter iterate
    n_iter: int
    converged: bool


def missing_patterns(M):
    pats, inverse = np.unique(M, axis=0, return_inverse=True)
    return [(pats[k], np.flatnonzero(inverse.ravel() == k)) for k in range(len(pats))]


def e_step(X, patterns, mu, sigma):
    """Fill conditional means; return (filled, summed conditional covariance,
    observed-data log-likelihood)."""
    n, p = X.shape
    filled = X.copy()
    corr = np.zeros((p, p))
    ll = 0.0
    for pat, rows in patterns:
        o = np.flatnonzero(pat)
        m = np.flatnonzero(~pat)
        if o.size:
            Soo = sigma[np.ix_(o, o)]
            chol = np.linalg.cholesky(Soo)
            dev = X[np.ix_(rows, o)] - mu[o]
            z = np.linalg.solve(chol, dev.T)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            ll += -0.5 * (np.sum(z * z) + rows.size * (o.size * np.log(2 * np.pi) + logdet))
        if m.size == 0:
            continue
        if o.size:
            coef = np.linalg.solve(Soo, sigma[np.ix_(o, m)]).T
            filled[np.ix_(rows, m)] = mu[m] + dev @ coef.T
            cond = sigma[np.ix_(m, m)] - coef @ sigma[np.ix_(o, m)]
        else:
            filled[np.ix_(rows, m)] = mu[m]
            cond = sigma[np.ix_(m, m)]
        corr[np.ix_(m, m)] += rows.size * cond
    return filled, corr, ll


def em_gaussian(X, M, max_iter=100, tol=1e-4):
    """Maximum-likelihood (mean, covariance) from incomplete rows.

    Starts from observed means and a diagonal of observed variances. The
    M-step adds ``SIGMA_RIDGE * I`` to keep the covariance invertible.
    Stops when every mean and covariance entry moves by less than ``tol``.
    """
    X = np.where(M, X, 0.0)
    n, p = X.shape
    mu = np.array([X[M[:, j], j].mean() for j in range(p)])
    var = np.array([X[M[:, j], j].var() for j in range(p)])
    sigma = np.diag(np.where(var > 0, var, 1.0))
    patterns = missing_patterns(M)
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        filled, corr, ll = e_step(X, patterns, mu, sigma)
        trace.append(ll)
        mu_new = filled.mean(axis=0)
        dev = filled - mu_new
        sigma_new = (dev.T @ dev + corr) / n + SIGMA_RIDGE * np.eye(p)
        delta = max(np.max(np.abs(mu_new - mu)), np.max(np.abs(sigma_new - sigma)))
        mu, sigma = mu_new, sigma_new
        if delta < tol:
            converged = True
            break
    trace.append(e_step(X, patterns, mu, sigma)[2])
    return EMResult(mu, sigma, tuple(trace), it, converged)


def em_impute(block, max_iter, tol):
    X = block.X.copy()
    trace = []
    num = np.flatnonzero(~block.is_cat)
    if num.size and not block.M[:, num].all():
        fit = block.fit
        res = em_gaussian(block.X[np.ix_(fit, num)], block.M[np.ix_(fit, num)], max_iter, tol)
        Xn = np.where(block.M[:, num], block.X[:, num], 0.0)
        filled, _, _ = e_step(Xn, missing_patterns(block.M[:, num]), res.mean, res.cov)
        X[:, num] = np.where(block.M[:, num], block.X[:, num], filled)
        trace = [(i, "em_loglik", v) for i, v in enumerate(res.loglik)]
    cat = np.flatnonzero(block.is_cat)
    if cat.size and not block.M[:, cat].all():
        M = block.M.copy()
        M[:, num] = True
        X = knn_fill(block, CATEGORICAL_K, columns=cat, X=X, M=M)
    return X, trace

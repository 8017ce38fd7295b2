import numpy as np
import pytest

from conftest import make_table
from oracles import gaussian_conditional
from mixedimpute.imputers import ImputerSpec, conditional_mean, em_gaussian, impute


def test_bivariate_conditional_mean_at_truth():
    mu = np.zeros(2)
    sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
    x = np.array([1.0, np.nan])
    out = conditional_mean(mu, sigma, x, np.array([True, False]))
    assert abs(out[1] - 0.5) < 1e-9
    assert out[0] == 1.0


def random_spd(g, p):
    A = g.normal(size=(p, p))
    return A @ A.T + p * 0.1 * np.eye(p)


def test_conditional_mean_matches_precision_oracle():
    g = np.random.default_rng(0)
    for _ in range(100):
        p = int(g.integers(2, 7))
        mu, sigma = g.normal(size=p), random_spd(g, p)
        obs = g.random(p) < 0.5
        obs[g.integers(p)] = True
        if obs.all():
            obs[(np.flatnonzero(obs)[0])] = False
        x = g.multivariate_normal(mu, sigma)
        got = conditional_mean(mu, sigma, x, obs)[~obs]
        assert np.max(np.abs(got - gaussian_conditional(mu, sigma, x, obs))) < 1e-9


def test_all_missing_row_gets_mean():
    mu = np.array([1.0, 2.0])
    out = conditional_mean(mu, np.eye(2), np.array([np.nan, np.nan]), np.zeros(2, bool))
    assert out.tolist() == [1.0, 2.0]


@pytest.fixture(scope="module")
def gaussian_fit():
    g = np.random.default_rng(11)
    mu = np.array([1.0, -1.0, 0.5, 2.0])
    # unit variances keep the sampling sd of every entry near 0.035
    sigma = np.array([[1, .5, .3, 0], [.5, 1, .4, .2], [.3, .4, 1, .6], [0, .2, .6, 1]])
    X = g.multivariate_normal(mu, sigma, size=2000)
    M = g.random(X.shape) >= 0.2
    return mu, sigma, em_gaussian(np.where(M, X, np.nan), M)


def test_em_recovers_parameters(gaussian_fit):
    mu, sigma, res = gaussian_fit
    assert res.converged
    assert np.max(np.abs(res.mean - mu)) < 0.05
    assert np.max(np.abs(res.cov - sigma)) < 0.1


def test_em_loglik_non_decreasing(gaussian_fit):
    ll = np.array(gaussian_fit[2].loglik)
    assert np.all(np.diff(ll) >= -1e-8)


def test_em_trace_in_diagnostics():
    g = np.random.default_rng(2)
    X = g.multivariate_normal([0, 0], [[1, .8], [.8, 1]], size=200)
    X[g.random(X.shape) < 0.2] = np.nan
    X[np.isnan(X).all(axis=1), 0] = 0.0
    res = impute(make_table(X, "nn"), ImputerSpec("em"))
    vals = [v for _, name, v in res.diagnostics if name == "em_loglik"]
    assert len(vals) >= 2 and np.all(np.diff(vals) >= -1e-8)


def test_em_imputes_categoricals_by_neighbour_mode():
    x = np.array([0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 0.15, 5.15])
    c = np.array([0, 0, 0, 1, 1, 1, np.nan, np.nan])
    y = x * 2 + 0.01 * np.arange(8)
    y[0] = np.nan
    out = impute(make_table(np.column_stack([x, y, c]), "nnc", levels=2),
                 ImputerSpec("em", k=3)).completions[0]
    assert out.values[6, 2] == 0 and out.values[7, 2] == 1

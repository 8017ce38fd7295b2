import numpy as np

from .._rng import cell_uniforms


def column_fill_values(block):
    """Observed mean (numerical) or mode (categorical, lowest level on ties)
    of each column, over the fitting rows."""
    out = np.zeros(block.X.shape[1])
    for j in range(block.X.shape[1]):
        obs = block.X[block.fit & block.M[:, j], j]
        if block.is_cat[j]:
            out[j] = np.argmax(np.bincount(obs.astype(np.int64), minlength=block.n_levels[j]))
        else:
            out[j] = obs.mean()
    return out


def mean_mode(block):
    fill = column_fill_values(block)
    return np.where(block.M, block.X, fill[None, :])


def random_draw(block):
    """Each missing cell takes a uniformly drawn observed value of its column."""
    X = block.X.copy()
    for j in range(X.shape[1]):
        miss = np.flatnonzero(~block.M[:, j])
        if miss.size == 0:
            continue
        pool = block.X[block.fit & block.M[:, j], j]
        u = cell_uniforms(block.seed, miss, j, stream=3)
        X[miss, j] = pool[np.minimum((u * pool.size).astype(np.int64), pool.size - 1)]
    return X

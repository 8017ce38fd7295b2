"""Seed derivation and counter-based per-cell randomness.

Every stochastic decision is a pure function of a master seed plus a key
path, so results never depend on evaluation order or thread scheduling.
"""

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def derive_seed(seed, *keys):
    """Return a 32-bit seed derived from ``seed`` and integer/string keys."""
    words = [int(seed) & 0xFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            # stable across processes, unlike hash()
            words.extend(key.encode("utf-8"))
            words.append(0x5A5A)
        else:
            words.append(int(key) & 0xFFFFFFFF)
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def rng(seed, *keys):
    return np.random.default_rng(derive_seed(seed, *keys))


def _splitmix(x):
    with np.errstate(over="ignore"):
        x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
        x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
        return x ^ (x >> np.uint64(31))


def cell_uniforms(seed, rows, cols, stream=0):
    """Uniform [0, 1) draws keyed by (seed, stream, row, col).

    ``rows`` and ``cols`` broadcast against each other.
    """
    rows = np.asarray(rows, dtype=np.uint64)
    cols = np.asarray(cols, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _splitmix(np.uint64(derive_seed(seed, stream)) + np.uint64(0))
        h = _splitmix(h ^ rows)
        h = _splitmix(h ^ (cols * np.uint64(0x632BE59BD9B4E019)))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

"""Missingness injection (MCAR/MAR/MNAR) and synthetic benchmark data."""

from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np
from scipy.stats import rankdata

from ._rng import cell_uniforms, derive_seed, rng
from .errors import SchemaError
from .table import FEATURE, LABEL, DataTable, categorical, numerical

MCAR, MAR, MNAR = "MCAR", "MAR", "MNAR"

# Source-track layout of the clinical corpus the benchmark mimics.
REPLICA_ROWS = (725, 280, 209, 154, 101, 96)
REPLICA_WIDTHS = (19, 36, 34, 20, 42, 47)
REPLICA_MISSINGNESS = (0.086, 0.091, 0.105, 0.222, 0.236, 0.183)
REPLICA_N_FEATURES = 87
REPLICA_N_NUMERICAL = 11


@dataclass(frozen=True)
class MissingnessMechanism:
    kind: str
    rate: float
    target_col: str | None = None
    cond_col: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (MCAR, MAR, MNAR):
            raise ValueError(f"unknown mechanism {self.kind!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {self.rate}")
        if self.kind in (MAR, MNAR) and self.target_col is None:
            raise ValueError(f"{self.kind} needs target_col")
        if self.kind == MAR:
            if self.cond_col is None:
                raise ValueError("MAR needs cond_col")
            if self.cond_col == self.target_col:
                raise ValueError("MAR cond_col must differ from target_col")


def mcar(rate, seed=0):
    return MissingnessMechanism(MCAR, rate, seed=seed)


def _rank_weighted_probs(values, rate):
    r = rankdata(values, method="average") / len(values)
    return np.clip(rate * r / r.mean(), 0.0, 1.0)


def inject(table, mech):
    """Mask cells of ``table`` according to ``mech``. Deterministic in the seed.

    Already-missing cells stay missing; label and identifier columns are
    never touched.
    """
    mask = table.mask.copy()
    n = table.n_rows
    if mech.kind == MCAR:
        feats = np.array(table.feature_indices, dtype=np.int64)
        if feats.size and n:
            u = cell_uniforms(mech.seed, np.arange(n)[:, None], feats[None, :], stream=1)
            mask[:, feats] &= ~(u < mech.rate)
        return table.with_cells(table.values, mask)

    j = table.index(mech.target_col)
    if table.schema[j].role != FEATURE:
        raise ValueError(f"{mech.target_col!r} is not a feature column")
    u = cell_uniforms(mech.seed, np.arange(n), j, stream=2)
    if mech.kind == MAR:
        c = table.index(mech.cond_col)
        if not table.mask[:, c].all():
            raise ValueError(f"MAR conditioning column {mech.cond_col!r} has missing values")
        p = _rank_weighted_probs(table.values[:, c], mech.rate)
        mask[:, j] &= ~(u < p)
    else:
        rows = np.flatnonzero(table.mask[:, j])
        if rows.size:
            p = _rank_weighted_probs(table.values[rows, j], mech.rate)
            mask[rows, j] &= ~(u[rows] < p)
    return table.with_cells(table.values, mask)


# --- synthetic data ----------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    n_rows: int
    n_numerical: int
    n_categorical: int
    levels_per_categorical: int = 3
    correlation: float = 0.0
    label_coefficients: tuple = None
    label_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        d = self.n_numerical + self.n_categorical
        if self.n_rows < 1 or self.n_numerical < 0 or self.n_categorical < 0 or d < 1:
            raise ValueError("need at least one row and one column")
        if self.levels_per_categorical < 2:
            raise ValueError("levels_per_categorical must be >= 2")
        if not -0.99 <= self.correlation <= 0.99:
            raise ValueError("correlation must lie in [-0.99, 0.99]")
        if d > 1 and self.correlation < -1.0 / (d - 1):
            raise ValueError(f"correlation below {-1.0 / (d - 1):.4f} is not positive definite")
        if self.label_noise < 0:
            raise ValueError("label_noise must be >= 0")
        coef = self.label_coefficients
        if coef is None:
            coef = (1.0,) * d
        coef = tuple(float(c) for c in coef)
        if len(coef) != d:
            raise ValueError(f"label_coefficients needs {d} entries, got {len(coef)}")
        object.__setattr__(self, "label_coefficients", coef)


def generate_synthetic(spec):
    """Draw a mixed-type table from an equicorrelated latent Gaussian.

    The first ``n_numerical`` latents are kept as-is; the rest are cut into
    equal-mass bins. The binary label is Bernoulli with success probability
    logistic(latents @ coefficients + noise).
    """
    d = spec.n_numerical + spec.n_categorical
    g = rng(spec.seed, "synthetic")
    cov = np.full((d, d), spec.correlation)
    np.fill_diagonal(cov, 1.0)
    chol = np.linalg.cholesky(cov)
    latent = g.standard_normal((spec.n_rows, d)) @ chol.T
    eta = latent @ np.asarray(spec.label_coefficients)
    eta = eta + spec.label_noise * g.standard_normal(spec.n_rows)
    label = (g.random(spec.n_rows) < 1.0 / (1.0 + np.exp(-eta))).astype(float)

    L = spec.levels_per_categorical
    cuts = np.array([NormalDist().inv_cdf(k / L) for k in range(1, L)])
    values = np.empty((spec.n_rows, d + 1))
    values[:, :spec.n_numerical] = latent[:, :spec.n_numerical]
    values[:, spec.n_numerical:d] = np.searchsorted(cuts, latent[:, spec.n_numerical:], side="right")
    values[:, d] = label

    levels = tuple(f"c{k}" for k in range(L))
    schema = ([numerical(f"num_{i}") for i in range(spec.n_numerical)]
              + [categorical(f"cat_{i}", levels) for i in range(spec.n_categorical)]
              + [categorical("label", ("0", "1"), role=LABEL)])
    return DataTable(tuple(schema), values).fill_ranges()


# --- tracks ------------------------------------------------------------------

@dataclass(frozen=True)
class TrackSpec:
    tracks: tuple = field(default_factory=tuple)   # ((row_count, (feature, ...)), ...)

    def __post_init__(self):
        object.__setattr__(self, "tracks",
                           tuple((int(n), tuple(f)) for n, f in self.tracks))

    def format(self):
        return "".join(f"{n}|{';'.join(f)}\n" for n, f in self.tracks)

    @classmethod
    def parse(cls, text):
        tracks = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "|" not in line:
                raise SchemaError(f"track line {lineno}: expected rows|feat1;feat2;...")
            n, feats = line.split("|", 1)
            try:
                n = int(n)
            except ValueError:
                raise SchemaError(f"track line {lineno}: bad row count {n!r}") from None
            tracks.append((n, tuple(f for f in feats.split(";") if f)))
        return cls(tuple(tracks))

    @classmethod
    def load(cls, path):
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def save(self, path):
        Path(path).write_text(self.format(), encoding="utf-8")


def split_tracks(table, spec):
    """Partition rows contiguously into tracks; blank unobserved features."""
    from .cross import TrackSet

    total = sum(n for n, _ in spec.tracks)
    if total != table.n_rows:
        raise SchemaError(f"track rows sum to {total}, table has {table.n_rows}")
    names = set(table.names)
    feats = table.feature_indices
    tracks = []
    start = 0
    for t, (n, observed) in enumerate(spec.tracks):
        unknown = [f for f in observed if f not in names]
        if unknown:
            raise SchemaError(f"track {t + 1}: unknown features {unknown}")
        keep = {table.index(f) for f in observed}
        part = table.take_rows(np.arange(start, start + n))
        mask = part.mask.copy()
        for j in feats:
            if j not in keep:
                mask[:, j] = False
        tracks.append((t + 1, part.with_cells(part.values, mask)))
        start += n
    return TrackSet.from_tracks(tracks, table.schema)


def replica_trackspec(feature_names, seed, rows=REPLICA_ROWS, widths=REPLICA_WIDTHS):
    """Six-track layout: each track observes a circular window of a shuffled
    feature order, windows laid end to end so together they cover everything.
    """
    feature_names = list(feature_names)
    p = len(feature_names)
    if sum(widths) < p:
        raise ValueError("track widths cannot cover every feature")
    order = rng(seed, "tracks").permutation(p)
    tracks, start = [], 0
    for n, w in zip(rows, widths):
        idx = sorted(order[(start + np.arange(w)) % p])
        tracks.append((n, tuple(feature_names[i] for i in idx)))
        start += w
    return TrackSpec(tuple(tracks))


def replica_trackset(seed, correlation=0.6, label_coefficients=None, label_noise=0.0,
                     missingness=REPLICA_MISSINGNESS, levels=3):
    """Synthetic stand-in for the six-source corpus: 1565 rows, 87 features
    (11 numerical, 76 categorical), per-track MCAR within observed features.
    """
    spec = SyntheticSpec(
        n_rows=sum(REPLICA_ROWS), n_numerical=REPLICA_N_NUMERICAL,
        n_categorical=REPLICA_N_FEATURES - REPLICA_N_NUMERICAL,
        levels_per_categorical=levels, correlation=correlation,
        label_coefficients=label_coefficients, label_noise=label_noise, seed=seed)
    table = generate_synthetic(spec)
    feats = [table.schema[j].name for j in table.feature_indices]
    ts = split_tracks(table, replica_trackspec(feats, seed))
    from .cross import TrackSet
    amputed = [(tid, inject(t, mcar(rate, seed=derive_seed(seed, "track-mcar", tid))))
               for (tid, t), rate in zip(ts.tracks, missingness)]
    return TrackSet.from_tracks(amputed, table.schema), table

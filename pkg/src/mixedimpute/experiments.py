"""Reusable experiment drivers behind ``scripts/`` and the acceptance suite."""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .evaluation import DELETION, evaluate, imputation_error
from .imputers import ImputerSpec, impute
from .missingness import SyntheticSpec, generate_synthetic, inject, mcar, replica_trackset

# missForest settings used by the benchmark drivers; the library defaults
# (100 trees, 10 sweeps) are several times slower on one core
BENCH_MISSFOREST = dict(n_trees=50, max_iter=5)
BENCH_MICE_M = 5


def benchmark_imputers(seed=0):
    return [DELETION,
            ImputerSpec("mean_mode", seed=seed),
            ImputerSpec("random", seed=seed),
            ImputerSpec("mice", m=BENCH_MICE_M, seed=seed),
            ImputerSpec("em", seed=seed),
            ImputerSpec("knn", seed=seed),
            ImputerSpec("missforest", seed=seed, **BENCH_MISSFOREST)]


class CachedImputer:
    """``impute`` memoized on (spec, table contents, fit rows).

    Whole-table evaluations of the same concatenated table then share one
    imputation across tracks.
    """

    def __init__(self):
        self._cache = {}

    def __call__(self, table, spec, fit_rows=None):
        h = hashlib.sha256(table.values.tobytes())
        h.update(table.mask.tobytes())
        h.update(repr([(c.name, c.kind, c.levels) for c in table.schema]).encode())
        if fit_rows is not None:
            h.update(np.asarray(fit_rows).tobytes())
        key = (spec, h.hexdigest())
        if key not in self._cache:
            self._cache[key] = impute(table, spec, fit_rows=fit_rows)
        return self._cache[key]


def synthetic_benchmark(seed, rows=800, n_numerical=8, n_categorical=4, correlation=0.6,
                        rate=0.3, classifiers=("tree", "forest", "logistic", "nb", "knn"),
                        imputers=None, k=5, forest_trees=100, threads=1):
    """Generate, ampute (MCAR) and evaluate one seed of the single-table benchmark."""
    truth = generate_synthetic(SyntheticSpec(rows, n_numerical, n_categorical,
                                             correlation=correlation, seed=seed))
    holed = inject(truth, mcar(rate, seed))
    imputers = benchmark_imputers(seed) if imputers is None else imputers
    return evaluate(holed, imputers, classifiers, k=k, seed=seed, threads=threads,
                    classifier_params={"forest": {"n_trees": forest_trees}})


@dataclass
class CrossResult:
    method: str
    single: list = field(default_factory=list)    # per-track accuracy, own features only
    cross: list = field(default_factory=list)     # per-track accuracy after cross imputation

    @property
    def single_mean(self):
        return float(np.mean(self.single))

    @property
    def cross_mean(self):
        return float(np.mean(self.cross))


def cross_vs_single(seed, specs, classifier="forest", k=5, forest_trees=100,
                    leakage_mode="whole-table", correlation=0.6):
    """Per-track accuracy of single-track imputation against cross imputation
    on the six-track replica.

    Single: each track keeps only the features it observes and is imputed
    on its own. Cross: the union table is imputed as a whole and each track's
    rows are cross-validated, the other tracks acting as donors only.
    """
    ts, _ = replica_trackset(seed, correlation=correlation)
    whole = ts.concatenated()
    slices = ts.row_slices()
    imputer_fn = CachedImputer()
    params = {"forest": {"n_trees": forest_trees}}
    out = []
    for spec in specs:
        res = CrossResult(spec.method)
        for tid, track in ts.tracks:
            keep = set(ts.observed_features(tid))
            own = [c.name for c in track.schema if c.role != "feature" or c.name in keep]
            for table, rows, acc in ((track.select(own), None, res.single),
                                     (whole, slices[tid], res.cross)):
                rep = evaluate(table, [spec], [classifier], k=k, seed=seed,
                               leakage_mode=leakage_mode, eval_rows=rows,
                               imputer_fn=imputer_fn, classifier_params=params)
                acc.append(rep.cell(spec.method, classifier).mean)
        out.append(res)
    return out


def nrmse_pair(seed, rows=500, n_numerical=6, n_categorical=2, correlation=0.7, rate=0.3,
               missforest=None):
    """(missforest nrmse, mean_mode nrmse) on one amputed correlated table."""
    truth = generate_synthetic(SyntheticSpec(rows, n_numerical, n_categorical,
                                             correlation=correlation, seed=seed))
    holed = inject(truth, mcar(rate, seed))
    amputed = truth.mask & ~holed.mask
    mf = ImputerSpec("missforest", seed=seed, **(missforest or BENCH_MISSFOREST))
    # impute() reads feature columns only; the label passes through
    return tuple(imputation_error(impute(holed, spec).completions[0], truth, amputed).nrmse
                 for spec in (mf, ImputerSpec("mean_mode")))

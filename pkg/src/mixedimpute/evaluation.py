"""Cross-validated imputation-then-classification benchmark."""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import derive_seed, rng
from .errors import DegenerateDataError
from .imputers import ImputerSpec, impute
from .learners.classifiers import make_classifier
from .table import DataTable, listwise_delete, missingness_stats

DELETION = "deletion"
DISPLAY = {
    "deletion": "Deletion", "mean_mode": "Mean", "random": "Random", "mice": "MICE",
    "em": "EM", "knn": "KNN", "missforest": "RF",
}
ROW_ORDER = ("deletion", "mean_mode", "random", "mice", "em", "knn", "missforest")
POOLING = ("probability", "consensus-table")
LEAKAGE = ("fold-safe", "whole-table")


# --- folds -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FoldAssignment:
    folds: np.ndarray
    k: int
    seed: int

    def train_test(self, f):
        return np.flatnonzero(self.folds != f), np.flatnonzero(self.folds == f)


def stratified_kfold(labels, k, seed):
    """Shuffle each class with a seeded permutation, then deal its members
    round-robin, carrying the fold pointer over from class to class.

    Every class needs two members (so each test row's class also occurs in
    training) and there must be at least ``k`` rows.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise ValueError("k must be >= 2")
    classes, counts = np.unique(labels, return_counts=True)
    if labels.size < k:
        raise DegenerateDataError("class-too-small", f"{labels.size} rows for {k} folds")
    if np.any(counts < 2):
        small = classes[counts < 2].tolist()
        raise DegenerateDataError("class-too-small", f"classes {small} have fewer than 2 rows")
    g = rng(seed, "folds")
    folds = np.empty(labels.size, dtype=np.int64)
    pointer = 0
    for c in classes:
        members = np.flatnonzero(labels == c)
        members = members[g.permutation(members.size)]
        folds[members] = (pointer + np.arange(members.size)) % k
        pointer = (pointer + members.size) % k
    return FoldAssignment(folds, k, seed)


# --- report types --------------------------------------------------------------

@dataclass(frozen=True)
class CellResult:
    accuracies: tuple = ()
    error: str | None = None

    @property
    def available(self):
        return self.error is None

    @property
    def mean(self):
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def std(self):
        if len(self.accuracies) < 2:
            return 0.0
        return float(np.std(self.accuracies, ddof=1))


@dataclass(frozen=True, eq=False)
class EvalReport:
    imputers: tuple
    classifiers: tuple
    cells: dict                         # (imputer, classifier) -> CellResult
    metadata: dict = field(default_factory=dict)

    def cell(self, imputer, classifier):
        return self.cells[(imputer, classifier)]

    @property
    def failed(self):
        return [key for key, c in self.cells.items() if not c.available]

    def merged(self, other):
        cells = dict(self.cells)
        cells.update(other.cells)
        imps = tuple(dict.fromkeys(self.imputers + other.imputers))
        clfs = tuple(dict.fromkeys(self.classifiers + other.classifiers))
        return EvalReport(imps, clfs, cells, {**self.metadata, **other.metadata})


@dataclass(frozen=True)
class ImputationErrorReport:
    nrmse: float | None
    pfc: float | None
    n_numerical: int
    n_categorical: int


# --- pooling -------------------------------------------------------------------

def consensus_table(completions):
    """Cell-wise pool: numerical mean, categorical mode (lowest level on ties)."""
    first = completions[0]
    if len(completions) == 1:
        return first
    stack = np.stack([c.values for c in completions])
    values = stack.mean(axis=0)
    for j in np.flatnonzero(first.is_categorical):
        L = first.schema[j].n_levels
        col = stack[:, :, j]
        if np.isnan(col).any():
            values[:, j] = first.values[:, j]
            continue
        counts = np.stack([(col == lv).sum(axis=0) for lv in range(L)], axis=1)
        values[:, j] = np.argmax(counts, axis=1)
    return first.with_cells(values, first.mask)


def _predict_pooled(completions, train, test, y_train, n_classes, name, params, seed, pooling):
    if pooling == "consensus-table":
        completions = [consensus_table(completions)]
    total = None
    for comp in completions:
        clf = make_classifier(name, **params.get(name, {}))
        clf.fit(comp.take_rows(train), y_train, n_classes, seed=seed)
        proba = clf.predict_proba(comp.take_rows(test))
        total = proba if total is None else total + proba
    return total / len(completions)


# --- the benchmark ---------------------------------------------------------------

def _label(imputer):
    return imputer if isinstance(imputer, str) else imputer.method


def evaluate(table, imputers, classifiers, k=5, seed=0, *, pooling="probability",
             leakage_mode="fold-safe", eval_rows=None, threads=1, imputer_fn=None,
             classifier_params=None):
    """Cross-validated accuracy for each (imputer, classifier) pair.

    ``imputers`` holds ImputerSpecs and/or ``"deletion"``. Imputers only
    ever see feature columns. In fold-safe mode each fold's imputation is
    fitted on every row except that fold's test rows. ``eval_rows``
    restricts cross-validation to a subset; other rows then act as extra
    imputation donors/training data only (used for cross imputation).
    Failures mark a cell unavailable instead of raising.
    """
    if pooling not in POOLING:
        raise ValueError(f"pooling must be one of {POOLING}")
    if leakage_mode not in LEAKAGE:
        raise ValueError(f"leakage_mode must be one of {LEAKAGE}")
    if isinstance(imputers, (str, ImputerSpec)):
        imputers = [imputers]
    imputer_fn = impute if imputer_fn is None else imputer_fn
    classifier_params = classifier_params or {}
    classifiers = tuple(classifiers)
    n_classes = table.schema[table.label_index].n_levels
    y = table.labels()
    eval_idx = np.arange(table.n_rows) if eval_rows is None else np.asarray(eval_rows)
    in_eval = np.zeros(table.n_rows, dtype=bool)
    in_eval[eval_idx] = True
    features = table.features()

    def unavailable(label, reason):
        return {(label, c): CellResult(error=reason) for c in classifiers}

    def score(completions, train, test, y_sub, fold):
        out = {}
        for name in classifiers:
            try:
                proba = _predict_pooled(completions, train, test, y_sub[train], n_classes, name,
                                        classifier_params, derive_seed(seed, "clf", name, fold),
                                        pooling)
                out[name] = float(np.mean(np.argmax(proba, axis=1) == y_sub[test]))
            except (DegenerateDataError, ValueError, np.linalg.LinAlgError) as exc:
                out[name] = exc
        return out

    def collect(label, per_fold):
        cells = {}
        for name in classifiers:
            accs = [r[name] for r in per_fold]
            bad = [a for a in accs if isinstance(a, Exception)]
            cells[(label, name)] = (CellResult(error=str(bad[0])) if bad
                                    else CellResult(tuple(accs)))
        return cells

    cells = {}
    try:
        folds = stratified_kfold(y[eval_idx], k, seed)
    except DegenerateDataError as exc:
        folds, fold_error = None, str(exc)

    tasks = []
    for imp in imputers:
        label = _label(imp)
        if imp == DELETION:
            try:
                deleted = listwise_delete(table.take_rows(eval_idx))
                dfolds = stratified_kfold(deleted.labels(), k, seed)
            except DegenerateDataError as exc:
                cells.update(unavailable(label, str(exc)))
                continue
            comp, yd = [deleted.features()], deleted.labels()
            tasks.append((label, [(lambda f, comp=comp: comp, *dfolds.train_test(f), yd, f)
                                  for f in range(k)]))
            continue
        if folds is None:
            cells.update(unavailable(label, fold_error))
            continue

        def run_impute(fit_rows, f, imp=imp):
            spec = replace(imp, seed=derive_seed(seed, imp.seed, "impute", f))
            return list(imputer_fn(features, spec, fit_rows=fit_rows).completions)

        if leakage_mode == "whole-table":
            cache = {}

            def completions_for(f, run_impute=run_impute, cache=cache):
                if "all" not in cache:
                    cache["all"] = run_impute(None, -1)
                return cache["all"]
        else:
            def completions_for(f, run_impute=run_impute):
                test_rows = eval_idx[folds.folds == f]
                fit = np.ones(table.n_rows, dtype=bool)
                fit[test_rows] = False
                return run_impute(fit, f)

        jobs = []
        for f in range(k):
            tr, te = folds.train_test(f)
            jobs.append((completions_for, eval_idx[tr], eval_idx[te], y, f))
        tasks.append((label, jobs))

    def run_job(job):
        get, train, test, y_sub, f = job
        try:
            completions = get(f)
        except (DegenerateDataError, ValueError, np.linalg.LinAlgError) as exc:
            return {name: exc for name in classifiers}
        return score(completions, train, test, y_sub, f)

    flat = [job for _, jobs in tasks for job in jobs]
    if threads > 1 and leakage_mode == "fold-safe":
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run_job, flat))
    else:
        results = [run_job(job) for job in flat]
    pos = 0
    for label, jobs in tasks:
        cells.update(collect(label, results[pos:pos + len(jobs)]))
        pos += len(jobs)

    labels = tuple(_label(i) for i in imputers)
    sub = table.take_rows(eval_idx)
    meta = {
        "k": k, "seed": seed, "pooling": pooling, "leakage_mode": leakage_mode,
        "rows": int(eval_idx.size),
        "missing_fraction": missingness_stats(sub).missing_fraction,
    }
    return EvalReport(labels, classifiers, {key: cells[key] for key in
                                            ((i, c) for i in labels for c in classifiers)}, meta)


# --- imputation quality -------------------------------------------------------------

def imputation_error(completed, truth, amputed_mask):
    """NRMSE over amputed numerical cells and PFC over amputed categorical cells."""
    amputed = np.asarray(amputed_mask, dtype=bool)
    if completed.values.shape != truth.values.shape or amputed.shape != truth.values.shape:
        raise ValueError("shapes of completed, truth and amputed_mask must match")
    is_cat = truth.is_categorical
    num_cells = amputed & ~is_cat[None, :]
    cat_cells = amputed & is_cat[None, :]
    nrmse = pfc = None
    if num_cells.any():
        est, true = completed.values[num_cells], truth.values[num_cells]
        rmse = np.sqrt(np.mean((est - true) ** 2))
        sd = np.std(true)
        nrmse = float(rmse / sd) if sd > 0 else (0.0 if rmse == 0 else float("inf"))
    if cat_cells.any():
        pfc = float(np.mean(completed.values[cat_cells] != truth.values[cat_cells]))
    return ImputationErrorReport(nrmse, pfc, int(num_cells.sum()), int(cat_cells.sum()))


# --- rendering -----------------------------------------------------------------------

def _ordered_imputers(report):
    known = [i for i in ROW_ORDER if i in report.imputers]
    return known + [i for i in report.imputers if i not in ROW_ORDER]


def render_report(report, fmt="text", rows="imputer"):
    """Text grid (per-row best marked ``*``, all ties marked) or CSV summary."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["imputer", "classifier", "status", "mean", "std", "n_folds", "accuracies"])
        for imp in _ordered_imputers(report):
            for clf in report.classifiers:
                c = report.cell(imp, clf)
                if c.available:
                    w.writerow([imp, clf, "ok", repr(c.mean), repr(c.std), len(c.accuracies),
                                ";".join(repr(a) for a in c.accuracies)])
                else:
                    w.writerow([imp, clf, "unavailable", "", "", 0, c.error])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")

    imps = _ordered_imputers(report)
    if rows == "imputer":
        row_keys, col_keys = imps, list(report.classifiers)
        get = lambda r, c: report.cell(r, c)
        row_name = lambda r: DISPLAY.get(r, r)
        col_name = lambda c: c
    else:
        row_keys, col_keys = list(report.classifiers), imps
        get = lambda r, c: report.cell(c, r)
        row_name = lambda r: r
        col_name = lambda c: DISPLAY.get(c, c)

    header = [""] + [col_name(c) for c in col_keys]
    lines = []
    for r in row_keys:
        cells = [get(r, c) for c in col_keys]
        best = max((c.mean for c in cells if c.available), default=None)
        entries = [row_name(r)]
        for c in cells:
            if not c.available:
                entries.append("n/a")
            else:
                mark = "*" if c.mean == best else ""
                entries.append(f"{c.mean:.3f}±{c.std:.3f}{mark}")
        lines.append(entries)
    widths = [max(len(x[i]) for x in [header] + lines) for i in range(len(header))]
    fmt_row = lambda cols: "  ".join(s.ljust(w) for s, w in zip(cols, widths)).rstrip()
    out = [fmt_row(header)] + [fmt_row(x) for x in lines]
    return "\n".join(out) + "\n"


def fold_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["imputer", "classifier", "fold", "accuracy"])
    for imp in _ordered_imputers(report):
        for clf in report.classifiers:
            for f, a in enumerate(report.cell(imp, clf).accuracies):
                w.writerow([imp, clf, f, repr(a)])
    return buf.getvalue()


def parse_report_csv(text):
    cells, imps, clfs = {}, [], []
    for row in csv.DictReader(io.StringIO(text)):
        imp, clf = row["imputer"], row["classifier"]
        imps.append(imp)
        clfs.append(clf)
        if row["status"] == "ok":
            accs = tuple(float(a) for a in row["accuracies"].split(";") if a)
            cells[(imp, clf)] = CellResult(accs)
        else:
            cells[(imp, clf)] = CellResult(error=row["accuracies"])
    return EvalReport(tuple(dict.fromkeys(imps)), tuple(dict.fromkeys(clfs)), cells)

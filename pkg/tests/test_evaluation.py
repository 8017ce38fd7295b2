import numpy as np
import pytest

from conftest import make_table
from mixedimpute.errors import DegenerateDataError
from mixedimpute.evaluation import (CellResult, EvalReport, evaluate, fold_csv, imputation_error,
                                    parse_report_csv, render_report, stratified_kfold)
from mixedimpute.imputers import ImputerSpec, impute
from mixedimpute.missingness import SyntheticSpec, generate_synthetic, inject, mcar
from mixedimpute.table import listwise_delete

CLFS = ("tree", "forest", "logistic", "nb", "knn")
SMALL_FOREST = {"forest": {"n_trees": 15}}


@pytest.fixture(scope="module")
def complete():
    return generate_synthetic(SyntheticSpec(120, 3, 2, correlation=0.5, seed=2))


def test_fold_example_6_4():
    labels = np.array([0] * 6 + [1] * 4)
    fa = stratified_kfold(labels, 5, seed=0)
    sizes = np.bincount(fa.folds, minlength=5)
    assert sizes.tolist() == [2] * 5
    zeros = np.bincount(fa.folds[labels == 0], minlength=5)
    assert set(zeros.tolist()) <= {1, 2}


def test_fold_class_too_small():
    with pytest.raises(DegenerateDataError, match="class-too-small"):
        stratified_kfold(np.arange(5), 5, seed=0)


def test_fold_ratio_within_one_sample():
    labels = np.random.default_rng(1).integers(0, 3, 1000)
    fa = stratified_kfold(labels, 5, seed=4)
    for c in range(3):
        expected = (labels == c).sum() / 5
        counts = np.bincount(fa.folds[labels == c], minlength=5)
        assert np.all(np.abs(counts - expected) <= 1)


def test_fold_deterministic_in_seed():
    labels = np.tile([0, 1], 50)
    a, b = stratified_kfold(labels, 5, 3), stratified_kfold(labels, 5, 3)
    assert np.array_equal(a.folds, b.folds)
    assert not np.array_equal(a.folds, stratified_kfold(labels, 5, 4).folds)


def test_complete_table_imputers_match_deletion(complete):
    imps = ["deletion"] + [ImputerSpec(m, m=2, iterations=2, n_trees=5, max_iter=2)
                           for m in ("mean_mode", "mice", "knn", "missforest")]
    rep = evaluate(complete, imps, CLFS, k=5, seed=1, classifier_params=SMALL_FOREST)
    for imp in rep.imputers[1:]:
        for clf in CLFS:
            assert rep.cell(imp, clf).accuracies == rep.cell("deletion", clf).accuracies


def test_deletion_equals_evaluating_deleted_table(complete):
    holed = inject(complete, mcar(0.05, 1))
    a = evaluate(holed, ["deletion"], CLFS, seed=5, classifier_params=SMALL_FOREST)
    b = evaluate(listwise_delete(holed), [ImputerSpec("mean_mode")], CLFS, seed=5,
                 classifier_params=SMALL_FOREST)
    for clf in CLFS:
        assert a.cell("deletion", clf).accuracies == b.cell("mean_mode", clf).accuracies


def test_label_never_reaches_imputer(complete):
    holed = inject(complete, mcar(0.2, 2))
    seen = []

    def spy(table, spec, fit_rows=None):
        seen.append([c.name for c in table.schema])
        return impute(table, spec, fit_rows=fit_rows)

    evaluate(holed, [ImputerSpec("mean_mode")], ["nb"], seed=0, imputer_fn=spy)
    evaluate(holed, [ImputerSpec("mean_mode")], ["nb"], seed=0, imputer_fn=spy,
             leakage_mode="whole-table")
    assert seen and all("label" not in names for names in seen)


def test_fold_safe_imputation_excludes_test_rows(complete):
    holed = inject(complete, mcar(0.2, 2))
    fits = []

    def spy(table, spec, fit_rows=None):
        fits.append(np.asarray(fit_rows))
        return impute(table, spec, fit_rows=fit_rows)

    evaluate(holed, [ImputerSpec("mean_mode")], ["nb"], k=5, seed=3, imputer_fn=spy)
    folds = stratified_kfold(holed.labels(), 5, 3).folds
    assert len(fits) == 5
    for f, fit in enumerate(fits):
        assert np.array_equal(fit, folds != f)


def test_mice_m1_probability_pooling_equals_single(complete):
    holed = inject(complete, mcar(0.2, 3))

    def as_single(table, spec, fit_rows=None):
        res = impute(table, spec, fit_rows=fit_rows)
        return type(res)(res.completions[:1])

    mice1 = ImputerSpec("mice", m=1, iterations=2)
    a = evaluate(holed, [mice1], CLFS, seed=2, classifier_params=SMALL_FOREST)
    b = evaluate(holed, [mice1], CLFS, seed=2, classifier_params=SMALL_FOREST,
                 pooling="consensus-table", imputer_fn=as_single)
    for clf in CLFS:
        assert a.cell("mice", clf).accuracies == b.cell("mice", clf).accuracies


def test_report_invariants_and_csv_round_trip(complete):
    holed = inject(complete, mcar(0.15, 4))
    rep = evaluate(holed, ["deletion", ImputerSpec("knn")], CLFS, seed=0,
                   classifier_params=SMALL_FOREST)
    for c in rep.cells.values():
        if not c.available:
            continue
        accs = np.array(c.accuracies)
        assert np.all((accs >= 0) & (accs <= 1)) and c.std >= 0
        assert abs(c.mean - accs.mean()) <= 1e-12
        assert abs(c.std - accs.std(ddof=1)) <= 1e-12
    back = parse_report_csv(render_report(rep, "csv"))
    for key, c in rep.cells.items():
        assert back.cells[key].accuracies == c.accuracies
        assert back.cells[key].mean == c.mean and back.cells[key].std == c.std


def test_failed_cells_are_unavailable_not_fatal():
    t = make_table([[1.0, np.nan], [np.nan, 1.0]] * 10, "nn", label=[0, 1] * 10)
    rep = evaluate(t, ["deletion", ImputerSpec("mean_mode")], ["nb"], seed=0)
    assert not rep.cell("deletion", "nb").available
    assert "deletion-empty" in rep.cell("deletion", "nb").error
    assert rep.cell("mean_mode", "nb").available
    assert rep.failed == [("deletion", "nb")]


def report_of(grid):
    cells = {(i, c): CellResult(tuple(v)) for (i, c), v in grid.items()}
    imps = tuple(dict.fromkeys(i for i, _ in grid))
    clfs = tuple(dict.fromkeys(c for _, c in grid))
    return EvalReport(imps, clfs, cells)


def test_text_single_cell_marked():
    text = render_report(report_of({("mean_mode", "nb"): [0.5, 0.7]}))
    assert text.count("*") == 1 and "Mean" in text


def test_text_ties_both_marked():
    rep = report_of({("knn", "nb"): [0.6, 0.8], ("knn", "tree"): [0.8, 0.6],
                     ("knn", "forest"): [0.1, 0.2]})
    line = render_report(rep).splitlines()[1]
    assert line.count("*") == 2


def test_text_layout_rows_in_table_order():
    grid = {(i, "nb"): [0.5, 0.6] for i in
            ("missforest", "knn", "em", "mice", "random", "mean_mode", "deletion")}
    rows = [line.split()[0] for line in render_report(report_of(grid)).splitlines()[1:]]
    assert rows == ["Deletion", "Mean", "Random", "MICE", "EM", "KNN", "RF"]
    header = render_report(report_of(grid), rows="classifier").splitlines()[0].split()
    assert header == ["Deletion", "Mean", "Random", "MICE", "EM", "KNN", "RF"]


def test_text_shows_acc_pm_std():
    text = render_report(report_of({("em", "nb"): [0.5, 0.7]}))
    assert "0.600±0.141*" in text


def test_fold_csv_rows():
    rep = report_of({("em", "nb"): [0.5, 0.7]})
    assert fold_csv(rep).splitlines() == ["imputer,classifier,fold,accuracy",
                                          "em,nb,0,0.5", "em,nb,1,0.7"]


def test_imputation_error_perfect_and_worst():
    truth = make_table([[1.0, 0], [2.0, 1], [3.0, 0]], "nc", levels=2)
    amputed = np.ones((3, 2), bool)
    rep = imputation_error(truth, truth, amputed)
    assert (rep.nrmse, rep.pfc) == (0.0, 0.0)
    wrong = truth.with_cells(np.column_stack([truth.values[:, 0], 1 - truth.values[:, 1]]))
    assert imputation_error(wrong, truth, amputed).pfc == 1.0


def test_imputation_error_absent_kind():
    truth = make_table([[1.0, 0], [2.0, 1]], "nc", levels=2)
    amputed = np.array([[True, False], [True, False]])
    rep = imputation_error(truth, truth, amputed)
    assert rep.pfc is None and rep.n_categorical == 0 and rep.n_numerical == 2


def test_mean_imputation_nrmse_near_one():
    truth = generate_synthetic(SyntheticSpec(5000, 1, 0, seed=6))
    holed = inject(truth, mcar(0.3, 6))
    out = impute(holed, ImputerSpec("mean_mode")).completions[0]
    rep = imputation_error(out, truth, holed.mask != truth.mask)
    assert abs(rep.nrmse - 1.0) <= 0.05


def test_threads_do_not_change_results(complete):
    holed = inject(complete, mcar(0.2, 5))
    imps = [ImputerSpec("knn"), ImputerSpec("random")]
    a = evaluate(holed, imps, ["tree", "nb"], seed=1)
    b = evaluate(holed, imps, ["tree", "nb"], seed=1, threads=4)
    assert render_report(a, "csv") == render_report(b, "csv")


def test_eval_rows_restricts_scored_rows(complete):
    holed = inject(complete, mcar(0.2, 7))
    rep = evaluate(holed, [ImputerSpec("mean_mode")], ["nb"], seed=0, eval_rows=np.arange(60))
    assert rep.metadata["rows"] == 60
    assert rep.cell("mean_mode", "nb").available

import numpy as np
import pytest

from conftest import make_table, random_mixed
from mixedimpute.errors import DegenerateDataError, SchemaError
from mixedimpute.table import (IDENTIFIER, LABEL, ColumnSchema, DataTable, categorical,
                               listwise_delete, load_csv, missingness_stats, numerical,
                               parse_schema, save_csv)


def write(tmp_path, csv_text, schema_text):
    (tmp_path / "t.csv").write_text(csv_text)
    (tmp_path / "t.schema.txt").write_text(schema_text)
    return tmp_path / "t.csv"


SCHEMA = "a|numerical||feature\nb|categorical|no;yes|feature\n"


def test_load_marks_empty_cells_missing(tmp_path):
    path = write(tmp_path, "a,b\n1.5,no\n,yes\n3,no\n", SCHEMA)
    t = load_csv(path)
    assert (~t.mask).sum() == 1
    assert not t.mask[1, 0]


def test_load_maps_levels_to_indices(tmp_path):
    t = load_csv(write(tmp_path, "a,b\n1,yes\n", SCHEMA))
    assert t.values[0, 1] == 1.0


def test_load_backfills_numerical_range(tmp_path):
    t = load_csv(write(tmp_path, "a,b\n1,yes\n-2,no\n4,\n", SCHEMA))
    col = t.column("a")
    assert (col.min, col.max) == (-2.0, 4.0)


@pytest.mark.parametrize("csv_text, needle", [
    ("a,b\n1,maybe\n", "unknown level"),
    ("a,b\nabc,no\n", "not a number"),
    ("a,b\n1,no,3\n", "expected 2 fields"),
])
def test_load_errors(tmp_path, csv_text, needle):
    with pytest.raises(SchemaError, match=needle):
        load_csv(write(tmp_path, csv_text, SCHEMA))


def test_unknown_level_error_names_row_and_column(tmp_path):
    with pytest.raises(SchemaError, match=r"row 3, column 'b'"):
        load_csv(write(tmp_path, "a,b\n1,no\n2,huh\n", SCHEMA))


def test_schema_rejects_bad_columns():
    with pytest.raises(SchemaError):
        categorical("x", ["a", "a"])
    with pytest.raises(SchemaError):
        categorical("x", [])
    with pytest.raises(SchemaError):
        numerical("x", 3.0, 1.0)
    with pytest.raises(SchemaError):
        parse_schema("x|ordinal||feature\n")


def test_save_complete_table_has_no_empty_fields(tmp_path):
    t = make_table([[1.0, 0], [2.0, 1]], "nc")
    save_csv(t, tmp_path / "o.csv")
    body = (tmp_path / "o.csv").read_text().splitlines()[1:]
    assert all("" not in line.split(",") for line in body)


def test_save_writes_empty_strings_for_missing(tmp_path):
    t = make_table([[1.0, np.nan], [np.nan, 1]], "nc")
    save_csv(t, tmp_path / "o.csv")
    assert (tmp_path / "o.csv").read_text().splitlines()[1:] == ["1.0,", ",l1"]


def test_round_trip_10x5_mixed(tmp_path):
    t = random_mixed(np.random.default_rng(4), 10, "ncncn", miss=0.3)
    num = ~t.is_categorical
    vals = np.array(t.values)
    vals[:, num] += np.pi * 1e-7  # awkward floats
    t = DataTable(t.schema, vals, t.mask).fill_ranges()
    save_csv(t, tmp_path / "r.csv")
    back = load_csv(tmp_path / "r.csv")
    assert np.array_equal(back.mask, t.mask)
    assert np.array_equal(back.values[t.mask], t.values[t.mask])
    assert [c.kind for c in back.schema] == [c.kind for c in t.schema]
    assert [c.levels for c in back.schema] == [c.levels for c in t.schema]


def test_missingness_replica_totals():
    # 1565 x 87 feature grid with 98712 masked cells
    n, p, missing = 1565, 87, 98712
    mask = np.ones(n * p, dtype=bool)
    mask[np.random.default_rng(0).permutation(n * p)[:missing]] = False
    schema = tuple(numerical(f"f{j}") for j in range(p))
    t = DataTable(schema, np.zeros((n, p)), mask.reshape(n, p))
    rep = missingness_stats(t)
    assert rep.total_missing == 98712
    assert rep.total_observed == 37443
    assert rep.missing_fraction == pytest.approx(0.725, abs=5e-4)


def test_missingness_complete_table_is_zero():
    assert missingness_stats(make_table([[1.0, 0]], "nc")).missing_fraction == 0


def test_missingness_ignores_label_and_identifier():
    schema = (numerical("x"), numerical("id", role=IDENTIFIER),
              categorical("y", ("0", "1"), role=LABEL))
    t = DataTable(schema, [[1.0, np.nan, np.nan], [np.nan, 2.0, 1.0]])
    rep = missingness_stats(t)
    assert (rep.total_observed, rep.total_missing) == (1, 1)


def test_listwise_identity_on_complete():
    t = make_table([[1.0, 0], [2.0, 1], [3.0, 0]], "nc", label=[0, 1, 1])
    assert listwise_delete(t).equals(t)


def test_listwise_keeps_complete_rows_in_order():
    t = make_table([[1.0, 0], [np.nan, 1], [3.0, np.nan], [4.0, 1]], "nc", label=[0, 1, 0, 1])
    out = listwise_delete(t)
    assert out.values[:, 0].tolist() == [1.0, 4.0]


def test_listwise_all_rows_incomplete():
    t = make_table([[1.0, np.nan], [np.nan, 1]], "nc", label=[0, 1])
    with pytest.raises(DegenerateDataError) as err:
        listwise_delete(t)
    assert err.value.code == "deletion-empty"


def test_listwise_single_label_is_degenerate():
    t = make_table([[1.0, 0], [2.0, 1], [np.nan, 1]], "nc", label=[1, 1, 0])
    with pytest.raises(DegenerateDataError, match="deletion-empty"):
        listwise_delete(t)


def test_table_rejects_invalid_level_index():
    with pytest.raises(SchemaError):
        make_table([[5.0]], "c")


def test_table_is_immutable():
    t = make_table([[1.0, 0]], "nc")
    with pytest.raises(ValueError):
        t.values[0, 0] = 3.0


def test_load_large_file_counts_missing(tmp_path):
    n, p, missing = 1565, 87, 98712
    flat = np.ones(n * p, dtype=bool)
    flat[np.random.default_rng(9).permutation(n * p)[:missing]] = False
    mask = flat.reshape(n, p)
    names = [f"f{j}" for j in range(p)]
    rows = [",".join(names)] + [",".join("1" if m else "" for m in row) for row in mask]
    (tmp_path / "big.csv").write_text("\n".join(rows) + "\n")
    (tmp_path / "big.schema.txt").write_text("".join(f"{c}|numerical||feature\n" for c in names))
    rep = missingness_stats(load_csv(tmp_path / "big.csv"))
    assert rep.total_missing == 98712 and rep.total_observed == 37443


def test_listwise_output_is_complete_subsequence():
    g = np.random.default_rng(12)
    t = random_mixed(g, 200, "ncnc", miss=0.1, label=True)
    out = listwise_delete(t)
    assert out.mask.all()
    keep = np.flatnonzero(t.mask.all(axis=1))
    assert np.array_equal(out.values, t.values[keep])


def test_report_totals_identity():
    t = random_mixed(np.random.default_rng(13), 37, "nccn", miss=0.35)
    rep = missingness_stats(t)
    assert rep.total_observed + rep.total_missing == 37 * 4
    assert rep.missing_fraction == rep.total_missing / (37 * 4)
    assert sum(o for _, o, _ in rep.per_column) == rep.total_observed

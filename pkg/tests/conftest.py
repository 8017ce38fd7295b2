import numpy as np
import pytest
from hypothesis import settings

from mixedimpute.table import LABEL, DataTable, categorical, numerical

settings.register_profile("ci", deadline=None, print_blob=True)
settings.load_profile("ci")


def make_table(values, kinds, levels=3, label=None):
    """Build a table from a float array (NaN = missing); ``kinds`` is a
    string of 'n'/'c' per column. ``label`` appends a binary label column."""
    values = np.asarray(values, dtype=float)
    schema = []
    for j, kind in enumerate(kinds):
        if kind == "c":
            schema.append(categorical(f"c{j}", [f"l{v}" for v in range(levels)]))
        else:
            schema.append(numerical(f"n{j}"))
    if label is not None:
        schema.append(categorical("label", ("0", "1"), role=LABEL))
        values = np.column_stack([values, np.asarray(label, dtype=float)])
    return DataTable(tuple(schema), values).fill_ranges()


def random_mixed(g, n, kinds, miss=0.2, levels=3, label=False):
    cols = []
    for kind in kinds:
        cols.append(g.integers(0, levels, n).astype(float) if kind == "c"
                    else np.round(g.normal(size=n), 1))
    values = np.column_stack(cols)
    values[g.random(values.shape) < miss] = np.nan
    lab = g.integers(0, 2, n) if label else None
    return make_table(values, kinds, levels, lab)


@pytest.fixture
def mixed_table():
    g = np.random.default_rng(0)
    return random_mixed(g, 60, "nncnc", miss=0.2, label=True)


ACCEPTANCE_LINES = []


def report_line(criterion, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

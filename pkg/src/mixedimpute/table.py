"""Mixed-type tables with an explicit observed-cell mask.

Values live in a float64 grid of shape (n_rows, n_cols). Categorical cells
hold the level index, numerical cells the number itself. Missing cells are
stored as NaN and flagged False in ``mask``; nothing reads them.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateDataError, SchemaError

CATEGORICAL = "categorical"
NUMERICAL = "numerical"
FEATURE = "feature"
LABEL = "label"
IDENTIFIER = "identifier"

_KINDS = (CATEGORICAL, NUMERICAL)
_ROLES = (FEATURE, LABEL, IDENTIFIER)


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    levels: tuple = ()
    min: float | None = None
    max: float | None = None
    role: str = FEATURE

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in _ROLES:
            raise SchemaError(f"column {self.name!r}: unknown role {self.role!r}")
        object.__setattr__(self, "levels", tuple(str(v) for v in self.levels))
        if self.kind == CATEGORICAL:
            if not self.levels:
                raise SchemaError(f"column {self.name!r}: categorical needs levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"column {self.name!r}: duplicate levels")
        elif self.levels:
            raise SchemaError(f"column {self.name!r}: numerical column with levels")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise SchemaError(f"column {self.name!r}: min > max")

    @property
    def is_categorical(self):
        return self.kind == CATEGORICAL

    @property
    def n_levels(self):
        return len(self.levels)


def categorical(name, levels, role=FEATURE):
    return ColumnSchema(name, CATEGORICAL, tuple(levels), role=role)


def numerical(name, min=None, max=None, role=FEATURE):
    return ColumnSchema(name, NUMERICAL, (), min, max, role)


@dataclass(frozen=True, eq=False)
class DataTable:
    schema: tuple
    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        schema = tuple(self.schema)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[1] != len(schema):
            raise SchemaError(
                f"values shape {values.shape} does not match {len(schema)} columns")
        if self.mask is None:
            mask = ~np.isnan(values)
        else:
            mask = np.array(self.mask, dtype=bool, copy=True)
            if mask.shape != values.shape:
                raise SchemaError("mask and values differ in shape")
        values[~mask] = np.nan
        if not np.all(np.isfinite(values[mask])):
            raise SchemaError("observed cells must be finite")
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        for j, col in enumerate(schema):
            if col.is_categorical:
                v = values[mask[:, j], j]
                bad = (v != np.round(v)) | (v < 0) | (v >= col.n_levels)
                if bad.any():
                    raise SchemaError(f"column {col.name!r}: invalid level index")
        values.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_cols(self):
        return self.values.shape[1]

    @property
    def names(self):
        return [c.name for c in self.schema]

    def index(self, name):
        for j, c in enumerate(self.schema):
            if c.name == name:
                return j
        raise SchemaError(f"unknown column {name!r}")

    def column(self, name):
        return self.schema[self.index(name)]

    @property
    def feature_indices(self):
        return [j for j, c in enumerate(self.schema) if c.role == FEATURE]

    @property
    def label_index(self):
        idx = [j for j, c in enumerate(self.schema) if c.role == LABEL]
        if len(idx) != 1:
            raise SchemaError(f"expected exactly one label column, found {len(idx)}")
        return idx[0]

    @property
    def is_categorical(self):
        return np.array([c.is_categorical for c in self.schema], dtype=bool)

    @property
    def n_levels(self):
        return np.array([c.n_levels for c in self.schema], dtype=np.int64)

    def ranges(self):
        """Per-column numerical range: schema bounds, else observed min/max."""
        out = np.zeros(self.n_cols)
        for j, c in enumerate(self.schema):
            if c.is_categorical:
                continue
            lo, hi = c.min, c.max
            obs = self.values[self.mask[:, j], j]
            if lo is None:
                lo = obs.min() if obs.size else 0.0
            if hi is None:
                hi = obs.max() if obs.size else 0.0
            out[j] = hi - lo
        return out

    def take_rows(self, rows):
        rows = np.asarray(rows)
        return DataTable(self.schema, self.values[rows], self.mask[rows])

    def select(self, names):
        idx = [self.index(n) for n in names]
        return DataTable(tuple(self.schema[j] for j in idx),
                         self.values[:, idx], self.mask[:, idx])

    def features(self):
        """The feature-role columns only (labels and identifiers dropped)."""
        return self.select([self.schema[j].name for j in self.feature_indices])

    def with_cells(self, values, mask=None):
        return DataTable(self.schema, values, self.mask if mask is None else mask)

    def with_schema(self, schema):
        return DataTable(tuple(schema), self.values, self.mask)

    def labels(self):
        """Label column as int level indices; raises if any label is missing."""
        j = self.label_index
        if not self.mask[:, j].all():
            raise SchemaError("label column has missing values")
        return self.values[:, j].astype(np.int64)

    def display(self, i, j):
        if not self.mask[i, j]:
            return ""
        col = self.schema[j]
        v = self.values[i, j]
        return col.levels[int(v)] if col.is_categorical else repr(float(v))

    def equals(self, other):
        return (self.schema == other.schema
                and np.array_equal(self.mask, other.mask)
                and np.array_equal(self.values[self.mask], other.values[other.mask]))

    def fill_ranges(self):
        """Return a copy whose open numerical bounds are set from the data."""
        schema = []
        for j, c in enumerate(self.schema):
            if not c.is_categorical and (c.min is None or c.max is None):
                obs = self.values[self.mask[:, j], j]
                if obs.size:
                    c = replace(c, min=c.min if c.min is not None else float(obs.min()),
                                max=c.max if c.max is not None else float(obs.max()))
            schema.append(c)
        return self.with_schema(schema)


def concat_rows(tables):
    schema = tables[0].schema
    for t in tables[1:]:
        if t.schema != schema:
            raise SchemaError("cannot concatenate tables with different schemas")
    return DataTable(schema, np.vstack([t.values for t in tables]),
                     np.vstack([t.mask for t in tables]))


# --- schema sidecar --------------------------------------------------------

def format_schema(schema):
    lines = []
    for c in schema:
        if c.is_categorical:
            middle = ";".join(c.levels)
        elif c.min is None and c.max is None:
            middle = ""
        else:
            lo = "" if c.min is None else repr(float(c.min))
            hi = "" if c.max is None else repr(float(c.max))
            middle = f"{lo}..{hi}"
        lines.append(f"{c.name}|{c.kind}|{middle}|{c.role}")
    return "\n".join(lines) + "\n"


def parse_schema(text):
    schema = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("|")
        if len(parts) != 4:
            raise SchemaError(f"schema line {lineno}: expected name|kind|levels-or-range|role")
        name, kind, middle, role = (p.strip() for p in parts)
        if kind == CATEGORICAL:
            schema.append(ColumnSchema(name, kind, tuple(middle.split(";")) if middle else (),
                                       role=role))
        elif kind == NUMERICAL:
            lo = hi = None
            if middle:
                if ".." not in middle:
                    raise SchemaError(f"schema line {lineno}: range must be min..max")
                a, b = middle.split("..", 1)
                try:
                    lo = float(a) if a else None
                    hi = float(b) if b else None
                except ValueError:
                    raise SchemaError(f"schema line {lineno}: bad range {middle!r}") from None
            schema.append(ColumnSchema(name, kind, (), lo, hi, role))
        else:
            raise SchemaError(f"schema line {lineno}: unknown kind {kind!r}")
    return tuple(schema)


def load_schema(path):
    return parse_schema(Path(path).read_text(encoding="utf-8"))


def save_schema(schema, path):
    Path(path).write_text(format_schema(schema), encoding="utf-8")


def schema_path_for(csv_path):
    p = Path(csv_path)
    return p.with_name(p.stem + ".schema.txt")


# --- CSV -------------------------------------------------------------------

def load_csv(path, schema_path=None):
    """Read a CSV plus its schema sidecar into a DataTable.

    Empty fields are missing. Open numerical ranges are filled from the
    observed values of this file.
    """
    schema = load_schema(schema_path if schema_path is not None else schema_path_for(path))
    by_name = {c.name: c for c in schema}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [n for n in header if n not in by_name]
        if missing:
            raise SchemaError(f"{path}: columns not in schema: {missing}")
        absent = [c.name for c in schema if c.name not in header]
        if absent:
            raise SchemaError(f"{path}: schema columns absent from CSV: {absent}")
        cols = [by_name[n] for n in header]
        lookup = [{lv: k for k, lv in enumerate(c.levels)} if c.is_categorical else None
                  for c in cols]
        rows = []
        for lineno, record in enumerate(reader, 2):
            if len(record) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}")
            out = []
            for c, lk, cell in zip(cols, lookup, record):
                if cell == "":
                    out.append(math.nan)
                elif lk is not None:
                    try:
                        out.append(float(lk[cell]))
                    except KeyError:
                        raise SchemaError(
                            f"{path}: row {lineno}, column {c.name!r}: unknown level {cell!r}") from None
                else:
                    try:
                        out.append(float(cell))
                    except ValueError:
                        raise SchemaError(
                            f"{path}: row {lineno}, column {c.name!r}: not a number: {cell!r}") from None
            rows.append(out)
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(cols))
    return DataTable(tuple(cols), values).fill_ranges()


def save_csv(table, path, schema_path=None):
    """Write ``table`` as CSV (empty string = missing) and its schema sidecar."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.names)
        for i in range(table.n_rows):
            writer.writerow([table.display(i, j) for j in range(table.n_cols)])
    save_schema(table.schema, schema_path if schema_path is not None else schema_path_for(path))


# --- missingness accounting -------------------------------------------------

@dataclass(frozen=True)
class MissingnessReport:
    per_column: tuple
    total_observed: int
    total_missing: int
    per_track: tuple = ()

    @property
    def missing_fraction(self):
        total = self.total_observed + self.total_missing
        return self.total_missing / total if total else 0.0

    def format(self):
        lines = ["column,observed,missing"]
        lines += [f"{n},{o},{m}" for n, o, m in self.per_column]
        lines.append(f"TOTAL,{self.total_observed},{self.total_missing}")
        lines.append(f"missing_fraction,{self.missing_fraction!r}")
        for tid, rep in self.per_track:
            lines.append(f"track {tid},{rep.total_observed},{rep.total_missing},"
                         f"{rep.missing_fraction!r}")
        return "\n".join(lines) + "\n"


def _report(table, cols):
    obs = table.mask[:, cols].sum(axis=0).astype(int)
    per = tuple((table.schema[j].name, int(o), int(table.n_rows - o)) for j, o in zip(cols, obs))
    total_obs = int(obs.sum())
    return MissingnessReport(per, total_obs, int(table.n_rows * len(cols) - total_obs))


def missingness_stats(table, tracks=None, mode="single"):
    """Count observed/missing feature cells.

    With ``tracks`` (a TrackSet), per-track reports are added. ``mode``
    "single" counts only the features a track observes at least once;
    "union" counts every feature of the union schema.
    """
    if table is None:
        table = tracks.concatenated()
    feats = table.feature_indices
    report = _report(table, feats)
    if tracks is None:
        return report
    if mode not in ("single", "union"):
        raise ValueError(f"unknown mode {mode!r}")
    per_track = []
    for tid, t in tracks.tracks:
        tf = t.feature_indices
        if mode == "single":
            tf = [j for j in tf if t.mask[:, j].any()]
        per_track.append((tid, _report(t, tf)))
    return replace(report, per_track=tuple(per_track))


def listwise_delete(table):
    """Keep rows whose feature and label cells are all observed."""
    cols = list(table.feature_indices)
    labels = [j for j, c in enumerate(table.schema) if c.role == LABEL]
    keep = np.flatnonzero(table.mask[:, cols + labels].all(axis=1))
    out = table.take_rows(keep)
    if out.n_rows < 2:
        raise DegenerateDataError("deletion-empty", f"{out.n_rows} complete rows remain")
    if labels and len(np.unique(out.values[:, labels[0]])) < 2:
        raise DegenerateDataError("deletion-empty", "complete rows hold a single label")
    return out

"""Cross imputation: fill features a track never observed using the tracks
that did, by imputing over the row-concatenation under the union schema."""

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import SchemaError
from .imputers import ImputationResult, impute
from .table import DataTable, concat_rows, missingness_stats

OBSERVED = "observed-in-track"
ABSENT = "absent-in-track"


@dataclass(frozen=True, eq=False)
class TrackSet:
    tracks: tuple           # ((track id, DataTable), ...) sharing union_schema
    union_schema: tuple
    provenance: dict        # (track id, column name) -> OBSERVED / ABSENT

    @classmethod
    def from_tracks(cls, tracks, schema):
        tracks = tuple((tid, t) for tid, t in tracks)
        prov = {}
        for tid, t in tracks:
            if t.schema != tuple(schema):
                raise SchemaError(f"track {tid} does not use the union schema")
            for j in t.feature_indices:
                prov[(tid, t.schema[j].name)] = OBSERVED if t.mask[:, j].any() else ABSENT
        return cls(tracks, tuple(schema), prov)

    @property
    def ids(self):
        return [tid for tid, _ in self.tracks]

    def concatenated(self):
        return concat_rows([t for _, t in self.tracks])

    def row_slices(self):
        """Row index ranges of each track inside :meth:`concatenated`."""
        out, start = {}, 0
        for tid, t in self.tracks:
            out[tid] = np.arange(start, start + t.n_rows)
            start += t.n_rows
        return out

    def observed_features(self, tid):
        return [name for (t, name), flag in self.provenance.items()
                if t == tid and flag == OBSERVED]

    def provenance_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["track", "column", "flag"])
        for tid, t in self.tracks:
            for j in t.feature_indices:
                name = t.schema[j].name
                w.writerow([tid, name, self.provenance[(tid, name)]])
        return buf.getvalue()


def _merge_column(a, b):
    if a.kind != b.kind:
        raise SchemaError(f"column {a.name!r} is {a.kind} in one track and {b.kind} in another")
    if a.role != b.role:
        raise SchemaError(f"column {a.name!r} has conflicting roles {a.role!r}/{b.role!r}")
    if a.is_categorical:
        return replace(a, levels=a.levels + tuple(v for v in b.levels if v not in a.levels))
    lo = [v for v in (a.min, b.min) if v is not None]
    hi = [v for v in (a.max, b.max) if v is not None]
    return replace(a, min=min(lo) if lo else None, max=max(hi) if hi else None)


def align_tracks(tables):
    """Widen each table to the union schema (by column name); absent columns
    are wholly missing and categorical vocabularies are merged."""
    union = {}
    for t in tables:
        for c in t.schema:
            union[c.name] = _merge_column(union[c.name], c) if c.name in union else c
    schema = tuple(union.values())
    widened = []
    for tid, t in enumerate(tables, 1):
        values = np.full((t.n_rows, len(schema)), np.nan)
        mask = np.zeros((t.n_rows, len(schema)), dtype=bool)
        for j, col in enumerate(schema):
            if col.name not in t.names:
                continue
            src = t.index(col.name)
            v = t.values[:, src]
            if col.is_categorical:
                remap = np.array([col.levels.index(lv) for lv in t.schema[src].levels], float)
                v = np.where(t.mask[:, src], remap[np.nan_to_num(v).astype(np.int64)], np.nan)
            values[:, j] = v
            mask[:, j] = t.mask[:, src]
        widened.append((tid, DataTable(schema, values, mask)))
    return TrackSet.from_tracks(widened, schema)


def cross_impute(ts, spec, audit=False, threads=1):
    """Impute the concatenation of all tracks; rows keep (track, row) order.

    Diagnostics gain one ``track_union_missingness`` entry per track (the
    iteration field holds the track id), measured before imputation.
    """
    table = ts.concatenated()
    report = missingness_stats(None, ts, mode="union")
    result = impute(table, spec, audit=audit, threads=threads)
    pre = tuple((tid, "track_union_missingness", rep.missing_fraction)
                for tid, rep in report.per_track)
    return ImputationResult(result.completions, pre + result.diagnostics, result.donors)


def slice_tracks(ts, completed):
    """Split a completed concatenated table back into per-track tables."""
    return {tid: completed.take_rows(rows) for tid, rows in ts.row_slices().items()}

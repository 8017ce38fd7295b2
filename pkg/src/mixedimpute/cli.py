"""Command-line front end.

Exit codes: 0 ok, 2 configuration, 3 data/schema, 4 degenerate data
(deletion-empty, all-missing-column, failed benchmark cells), 5 internal.
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateDataError, SchemaError
from .evaluation import DELETION, evaluate, fold_csv, imputation_error, render_report
from .imputers import METHODS, ImputerSpec, impute
from .learners.classifiers import CLASSIFIERS
from .missingness import (MAR, MCAR, MNAR, MissingnessMechanism, SyntheticSpec, TrackSpec,
                          generate_synthetic, inject, split_tracks)
from .table import load_csv, missingness_stats, save_csv

COMMANDS = ("stats", "generate", "ampute", "impute", "evaluate", "cross-eval")
STOCHASTIC = {"generate", "ampute", "impute", "evaluate", "cross-eval"}
_IMPUTE_KEYS = {"method", "k", "m", "iterations", "max_iter", "trees", "tol", "noise"}
_EVAL_KEYS = _IMPUTE_KEYS | {"methods", "folds", "classifiers", "forest_trees", "pooling",
                             "leakage_mode"}
# keys that can change a command's artifacts; threads and paths of outputs cannot
_ECHO_KEYS = {
    "stats": {"input", "schema", "tracks"},
    "generate": {"seed", "rows", "numerical", "categorical", "levels", "correlation",
                 "label_noise", "coefficients"},
    "ampute": {"input", "schema", "seed", "mcar", "mar", "mnar", "target_col", "cond_col"},
    "impute": {"input", "schema", "seed", "truth", "true_mask"} | _IMPUTE_KEYS,
    "evaluate": {"input", "schema", "seed"} | _EVAL_KEYS,
    "cross-eval": {"input", "schema", "seed", "tracks"} | _EVAL_KEYS,
}

EXIT_CONFIG, EXIT_DATA, EXIT_DEGENERATE, EXIT_INTERNAL = 2, 3, 4, 5


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        if name == "options":
            raise AttributeError(name)
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None

    def method_list(self):
        if self.options.get("methods"):
            return [m.strip() for m in self.methods.split(",") if m.strip()]
        return [self.method] if self.options.get("method") else []

    def classifier_list(self):
        return [c.strip() for c in (self.classifiers or "").split(",") if c.strip()]

    def echo(self):
        """``key=value`` lines accepted back by ``--config``."""
        lines = [f"# {self.command}"]
        for key in sorted(self.options):
            value = self.options[key]
            if key not in _ECHO_KEYS[self.command] or value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key.replace('_', '-')}={value}")
        return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="mixedimpute", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="file of key=value lines using the flag names")
    p.add_argument("--input")
    p.add_argument("--schema")
    p.add_argument("--output-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    # imputation
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--methods", help="comma list; may include 'deletion'")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--noise", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--truth", help="complete CSV for imputation-error scoring (impute)")
    p.add_argument("--true-mask", help="amputed-cell list written by 'ampute'")
    # amputation
    mech = p.add_mutually_exclusive_group()
    mech.add_argument("--mcar", type=float)
    mech.add_argument("--mar", type=float)
    mech.add_argument("--mnar", type=float)
    p.add_argument("--target-col")
    p.add_argument("--cond-col")
    # evaluation
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--classifiers", default="tree,forest,logistic,nb,knn")
    p.add_argument("--forest-trees", type=int, default=100)
    p.add_argument("--tracks", help="track spec file: rows|feat1;feat2;... per line")
    p.add_argument("--pooling", choices=("probability", "consensus-table"), default="probability")
    p.add_argument("--leakage-mode", choices=("fold-safe", "whole-table"), default="fold-safe")
    # generation
    p.add_argument("--rows", type=int, default=800)
    p.add_argument("--numerical", type=int, default=8)
    p.add_argument("--categorical", type=int, default=4)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--correlation", type=float, default=0.6)
    p.add_argument("--label-noise", type=float, default=0.0)
    p.add_argument("--coefficients", help="comma list of label coefficients (default all 1)")
    return p


def _config_argv(path):
    argv = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false") and key in ("noise",):
            argv.append(flag if value.lower() == "true" else "--no-" + key)
        else:
            argv += [flag, value]
    return argv


def parse_config(argv):
    """Turn command-line arguments (plus any ``--config`` file) into a RunConfig.

    Explicit flags override values from the config file.
    """
    parser = build_parser()
    first = parser.parse_args(argv)
    if first.config:
        args = parser.parse_args(_config_argv(first.config) + list(argv))
    else:
        args = first
    opts = vars(args)
    cfg = RunConfig(opts.pop("command"), opts)
    _validate(cfg)
    return cfg


def _require(cfg, *names):
    missing = [n for n in names if cfg.options.get(n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ConfigError(f"'{cfg.command}' requires {flags}")


def _validate(cfg):
    if cfg.command in STOCHASTIC:
        _require(cfg, "seed")
    if cfg.command != "generate":
        _require(cfg, "input")
    if cfg.command != "stats":
        _require(cfg, "output_dir")
    if cfg.command == "impute":
        _require(cfg, "method")
    if cfg.command in ("evaluate", "cross-eval") and not (cfg.methods or cfg.method):
        raise ConfigError(f"'{cfg.command}' requires --methods or --method")
    if cfg.command == "cross-eval":
        _require(cfg, "tracks")
    if cfg.command == "ampute":
        if cfg.mcar is None and cfg.mar is None and cfg.mnar is None:
            raise ConfigError("'ampute' requires one of --mcar, --mar, --mnar")
        if cfg.mar is not None:
            _require(cfg, "target_col", "cond_col")
        if cfg.mnar is not None:
            _require(cfg, "target_col")
    for name in cfg.classifier_list():
        if name not in CLASSIFIERS:
            raise ConfigError(f"unknown classifier {name!r}; choose from {sorted(CLASSIFIERS)}")
    for name in cfg.method_list():
        if name != DELETION and name not in METHODS:
            raise ConfigError(f"unknown method {name!r}")
        if name != DELETION:
            imputer_spec(cfg, name)
    if cfg.threads < 1 or cfg.folds < 2:
        raise ConfigError("--threads must be >= 1 and --folds >= 2")


def imputer_spec(cfg, method):
    try:
        return ImputerSpec(method, k=cfg.k, m=cfg.m, iterations=cfg.iterations, noise=cfg.noise,
                           max_iter=cfg.max_iter, tol=cfg.tol, n_trees=cfg.trees, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _imputers(cfg):
    return [DELETION if m == DELETION else imputer_spec(cfg, m) for m in cfg.method_list()]


# --- commands ------------------------------------------------------------------

def _out(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.echo(), encoding="utf-8")
    return out


def _load(cfg):
    return load_csv(cfg.input, cfg.schema)


def cmd_stats(cfg):
    table = _load(cfg)
    ts = split_tracks(table, TrackSpec.load(cfg.tracks)) if cfg.tracks else None
    text = missingness_stats(table, ts).format()
    if ts is not None:
        union = missingness_stats(table, ts, mode="union")
        text += "".join(f"track {tid} union,{r.total_observed},{r.total_missing},"
                        f"{r.missing_fraction!r}\n" for tid, r in union.per_track)
    if cfg.output_dir:
        (_out(cfg) / "stats.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_generate(cfg):
    coef = None
    if cfg.coefficients:
        coef = tuple(float(c) for c in cfg.coefficients.split(","))
    try:
        spec = SyntheticSpec(cfg.rows, cfg.numerical, cfg.categorical, cfg.levels,
                             cfg.correlation, coef, cfg.label_noise, cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = _out(cfg)
    save_csv(generate_synthetic(spec), out / "data.csv")
    return 0


def cmd_ampute(cfg):
    table = _load(cfg)
    try:
        if cfg.mcar is not None:
            mech = MissingnessMechanism(MCAR, cfg.mcar, seed=cfg.seed)
        elif cfg.mar is not None:
            mech = MissingnessMechanism(MAR, cfg.mar, cfg.target_col, cfg.cond_col, cfg.seed)
        else:
            mech = MissingnessMechanism(MNAR, cfg.mnar, cfg.target_col, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    amputed = inject(table, mech)
    out = _out(cfg)
    save_csv(amputed, out / "amputed.csv")
    newly = table.mask & ~amputed.mask
    with open(out / "true_mask.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "column"])
        for i, j in zip(*np.nonzero(newly)):
            w.writerow([int(i), table.schema[j].name])
    return 0


def read_true_mask(path, table):
    mask = np.zeros((table.n_rows, table.n_cols), dtype=bool)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            mask[int(row["row"]), table.index(row["column"])] = True
    return mask


def cmd_impute(cfg):
    table = _load(cfg)
    result = impute(table, imputer_spec(cfg, cfg.method), threads=cfg.threads)
    out = _out(cfg)
    if len(result.completions) == 1:
        save_csv(result.completions[0], out / "completed.csv")
    else:
        for c, comp in enumerate(result.completions, 1):
            save_csv(comp, out / f"completed_{c}.csv")
    (out / "diagnostics.csv").write_text(result.diagnostics_csv(), encoding="utf-8")
    if cfg.truth and cfg.true_mask:
        truth = load_csv(cfg.truth, cfg.schema)
        amputed = read_true_mask(cfg.true_mask, truth)
        lines = ["completion,nrmse,pfc,numerical_cells,categorical_cells"]
        for c, comp in enumerate(result.completions, 1):
            e = imputation_error(comp, truth, amputed)
            lines.append(f"{c},{'' if e.nrmse is None else repr(e.nrmse)},"
                         f"{'' if e.pfc is None else repr(e.pfc)},{e.n_numerical},{e.n_categorical}")
        (out / "imputation_error.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _evaluate(cfg, table, **kw):
    return evaluate(table, _imputers(cfg), cfg.classifier_list(), cfg.folds, cfg.seed,
                    pooling=cfg.pooling, leakage_mode=cfg.leakage_mode, threads=cfg.threads,
                    classifier_params={"forest": {"n_trees": cfg.forest_trees}}, **kw)


def _write_report(cfg, out, stem, report):
    header = "".join(f"# {line}\n" for line in cfg.echo().splitlines() if not line.startswith("#"))
    (out / f"{stem}.txt").write_text(header + render_report(report, "text"), encoding="utf-8")
    (out / f"{stem}_summary.csv").write_text(render_report(report, "csv"), encoding="utf-8")
    (out / f"{stem}_folds.csv").write_text(fold_csv(report), encoding="utf-8")


def cmd_evaluate(cfg):
    table = _load(cfg)
    report = _evaluate(cfg, table)
    out = _out(cfg)
    _write_report(cfg, out, "report", report)
    sys.stdout.write(render_report(report, "text"))
    return EXIT_DEGENERATE if report.failed else 0


def cmd_cross_eval(cfg):
    table = _load(cfg)
    ts = split_tracks(table, TrackSpec.load(cfg.tracks))
    out = _out(cfg)
    (out / "provenance.csv").write_text(ts.provenance_csv(), encoding="utf-8")
    single = missingness_stats(None, ts, mode="single")
    union = missingness_stats(None, ts, mode="union")
    lines = ["track,single_missingness,union_missingness"]
    lines += [f"{tid},{s.missing_fraction!r},{u.missing_fraction!r}"
              for (tid, s), (_, u) in zip(single.per_track, union.per_track)]
    (out / "track_missingness.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    failed = False
    whole = ts.concatenated()
    slices = ts.row_slices()
    for tid, track in ts.tracks:
        own = [c.name for c in track.schema
               if c.role != "feature" or c.name in ts.observed_features(tid)]
        rep = _evaluate(cfg, track.select(own))
        _write_report(cfg, out, f"track{tid}_single", rep)
        failed |= bool(rep.failed)
        rep = _evaluate(cfg, whole, eval_rows=slices[tid])
        _write_report(cfg, out, f"track{tid}_cross", rep)
        failed |= bool(rep.failed)
    pooled = _evaluate(cfg, whole)
    _write_report(cfg, out, "pooled", pooled)
    failed |= bool(pooled.failed)
    sys.stdout.write(render_report(pooled, "text"))
    return EXIT_DEGENERATE if failed else 0


HANDLERS = {
    "stats": cmd_stats, "generate": cmd_generate, "ampute": cmd_ampute,
    "impute": cmd_impute, "evaluate": cmd_evaluate, "cross-eval": cmd_cross_eval,
}


def run(cfg):
    """Execute a validated RunConfig and map failures to exit codes."""
    try:
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

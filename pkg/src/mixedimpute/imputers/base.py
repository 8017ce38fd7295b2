import csv
import io
from dataclasses import dataclass, field

import numpy as np

METHODS = ("mean_mode", "random", "knn", "mice", "em", "missforest")

_DEFAULT_MAX_ITER = {"em": 100, "missforest": 10}


@dataclass(frozen=True)
class ImputerSpec:
    """Method selector plus hyperparameters. Fields a method does not use
    are ignored by it."""

    method: str
    k: int = 5
    m: int = 20
    iterations: int = 10
    noise: bool = True
    max_iter: int | None = None
    tol: float = 1e-4
    n_trees: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown imputation method {self.method!r}; choose from {METHODS}")
        if self.k < 1 or self.m < 1 or self.iterations < 1 or self.n_trees < 1:
            raise ValueError("k, m, iterations and n_trees must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter is None:
            object.__setattr__(self, "max_iter", _DEFAULT_MAX_ITER.get(self.method, 10))
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    @property
    def n_completions(self):
        return self.m if self.method == "mice" else 1


@dataclass(frozen=True, eq=False)
class ImputationResult:
    completions: tuple
    diagnostics: tuple = ()          # (iteration, statistic, value)
    donors: dict = field(default_factory=dict)

    def diagnostics_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "statistic", "value"])
        for it, name, value in self.diagnostics:
            w.writerow([it, name, repr(float(value))])
        return buf.getvalue()


@dataclass
class Block:
    """Feature-only working view handed to the method implementations."""

    X: np.ndarray           # (n, p) with NaN at missing cells
    M: np.ndarray           # observed mask
    is_cat: np.ndarray
    n_levels: np.ndarray
    ranges: np.ndarray
    fit: np.ndarray         # rows whose observed cells may train models
    names: list
    seed: int
    threads: int = 1

    @property
    def shape(self):
        return self.X.shape

    def incomplete_columns(self):
        """Columns with a missing cell, by increasing missingness then index."""
        miss = (~self.M).sum(axis=0)
        cols = [j for j in range(self.X.shape[1]) if miss[j] > 0]
        return sorted(cols, key=lambda j: (miss[j], j))

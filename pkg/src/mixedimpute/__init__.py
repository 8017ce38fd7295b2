"""Mixed-type missing-data imputation toolkit and benchmark harness."""

from .cross import TrackSet, align_tracks, cross_impute, slice_tracks
from .errors import ConfigError, DegenerateDataError, SchemaError
from .evaluation import (EvalReport, FoldAssignment, evaluate, imputation_error,
                         render_report, stratified_kfold)
from .imputers import ImputationResult, ImputerSpec, impute
from .missingness import (MissingnessMechanism, SyntheticSpec, TrackSpec, generate_synthetic,
                          inject, split_tracks)
from .table import (ColumnSchema, DataTable, MissingnessReport, listwise_delete, load_csv,
                    missingness_stats, save_csv)

__version__ = "0.1.0"

"""Missingness accounting of the six-track replica, single-track and union views.

    python scripts/run_missingness.py --seed 0
"""

import argparse

from mixedimpute.missingness import replica_trackset
from mixedimpute.table import missingness_stats


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ts, _ = replica_trackset(args.seed)
    single = dict(missingness_stats(None, ts, "single").per_track)
    union = dict(missingness_stats(None, ts, "union").per_track)
    print(f"{'track':>5} {'rows':>5} {'features':>8} {'single':>8} {'union':>8}")
    for tid, t in ts.tracks:
        print(f"{tid:>5} {t.n_rows:>5} {len(ts.observed_features(tid)):>8} "
              f"{single[tid].missing_fraction:8.3f} {union[tid].missing_fraction:8.3f}")
    total = missingness_stats(None, ts, "union")
    print(f"observed {total.total_observed}, missing {total.total_missing}, "
          f"fraction {total.missing_fraction:.3f}")


if __name__ == "__main__":
    main()

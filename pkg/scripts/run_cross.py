"""Cross imputation against single-track imputation on the six-track replica.

    python scripts/run_cross.py --seeds 10 --methods knn,missforest
"""

import argparse

import numpy as np

from mixedimpute.experiments import BENCH_MISSFOREST, BENCH_MICE_M, cross_vs_single
from mixedimpute.imputers import ImputerSpec


def spec_for(method, seed):
    if method == "missforest":
        return ImputerSpec(method, seed=seed, **BENCH_MISSFOREST)
    if method == "mice":
        return ImputerSpec(method, m=BENCH_MICE_M, seed=seed)
    return ImputerSpec(method, seed=seed)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--methods", default="knn,missforest")
    ap.add_argument("--classifier", default="forest")
    ap.add_argument("--leakage-mode", default="whole-table", choices=("whole-table", "fold-safe"))
    args = ap.parse_args()

    methods = args.methods.split(",")
    totals = {m: ([], []) for m in methods}
    for seed in range(args.seeds):
        results = cross_vs_single(seed, [spec_for(m, seed) for m in methods],
                                  classifier=args.classifier, leakage_mode=args.leakage_mode)
        for r in results:
            totals[r.method][0].append(r.single_mean)
            totals[r.method][1].append(r.cross_mean)
            print(f"seed {seed} {r.method:<10} single {np.round(r.single, 3)} "
                  f"cross {np.round(r.cross, 3)}", flush=True)
    print(f"\n{'method':<10} {'single':>8} {'cross':>8}")
    for m, (single, cross) in totals.items():
        print(f"{m:<10} {np.mean(single):8.4f} {np.mean(cross):8.4f}")


if __name__ == "__main__":
    main()

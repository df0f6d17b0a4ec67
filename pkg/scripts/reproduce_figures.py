"""Sum rate versus SNR sweeps for N = 3 and N = 11, with gap summaries.

    python scripts/reproduce_figures.py --trials 2000 --outdir results/
"""

import argparse
import os
import time

from subspace_ia.harness import (
    ExperimentConfig,
    fitted_slope,
    format_table,
    run_experiment,
    summarize_gaps,
    write_csv,
)

FIGURES = {"fig1": 1, "fig2": 5}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2011)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--only", choices=sorted(FIGURES), default=None)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    for name, n in FIGURES.items():
        if args.only and name != args.only:
            continue
        cfg = ExperimentConfig(n=n, trials=args.trials, master_seed=args.seed, workers=args.workers)
        t0 = time.time()
        table = run_experiment(cfg)
        path = os.path.join(args.outdir, f"{name}_n{n}.csv")
        write_csv(table, path)
        print(f"== {name}: {path} ({time.time() - t0:.0f} s)")
        print(format_table(table))
        for snr in (10.0, 50.0):
            print(summarize_gaps(table, "cj", snr))
            print(summarize_gaps(table, "kt-op", snr))
        for s in table.schemes:
            print(f"  slope 40-50 dB {s:8s} {fitted_slope(table, s, 40, 50):.4f}")


if __name__ == "__main__":
    main()

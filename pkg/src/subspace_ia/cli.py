"""Command line entry point: ``ia-sim``.

A config file holds ``key = value`` lines whose keys are the long flag
names without dashes (``snr-start = 0``); command line flags win.
"""

import argparse
import logging
import sys

import numpy as np

from .harness import (
    SCHEMES,
    ExperimentConfig,
    format_table,
    run_experiment,
    summarize_gaps,
    write_csv,
    write_trial_dump,
)
from .schemes import SolverOptions

EXIT_NONCONVERGED = 2


def read_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def build_parser():
    ap = argparse.ArgumentParser(prog="ia-sim", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="key = value file mirroring these flags")
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--snr-start", type=float, default=0.0)
    ap.add_argument("--snr-stop", type=float, default=50.0)
    ap.add_argument("--snr-step", type=float, default=5.0)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--schemes", default=",".join(SCHEMES))
    ap.add_argument("--no-shv", action="store_true")
    ap.add_argument("--min-mag", type=float, default=0.1)
    ap.add_argument("--max-mag", type=float, default=10.0)
    ap.add_argument("--out", default=None, help="CSV output path")
    ap.add_argument("--kkt-tol", type=float, default=SolverOptions.kkt_tol)
    ap.add_argument("--max-iters", type=int, default=SolverOptions.max_iters)
    ap.add_argument("--summary-at", type=float, default=None, help="SNR (dB) for a gap report")
    ap.add_argument("--baseline", default="cj")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--dump-trials", default=None, help="opt-in per-trial CSV dump")
    return ap


def _coerce(ap, key, value):
    action = next(a for a in ap._actions if a.dest == key)
    if isinstance(action, argparse._StoreTrueAction):
        return value.lower() in ("1", "true", "yes", "on")
    return action.type(value) if action.type else value


def parse_args(argv=None):
    ap = build_parser()
    pre, _ = ap.parse_known_args(argv)
    if pre.config:
        file_vals = read_config_file(pre.config)
        known = {a.dest for a in ap._actions}
        unknown = set(file_vals) - known
        if unknown:
            ap.error(f"unknown config keys: {sorted(unknown)}")
        ap.set_defaults(**{k: _coerce(ap, k, v) for k, v in file_vals.items()})
    return ap.parse_args(argv)


def config_from_args(args):
    grid = np.arange(args.snr_start, args.snr_stop + args.snr_step / 2, args.snr_step)
    return ExperimentConfig(
        n=args.n,
        snr_db_grid=tuple(round(float(s), 10) for s in grid),
        trials=args.trials,
        master_seed=args.seed,
        schemes=tuple(s.strip() for s in args.schemes.split(",") if s.strip()),
        shv=not args.no_shv,
        min_mag=args.min_mag,
        max_mag=args.max_mag,
        solver=SolverOptions(max_iters=args.max_iters, kkt_tol=args.kkt_tol),
        out=args.out,
        workers=args.workers,
    )


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = parse_args(argv)
        cfg = config_from_args(args)
        table = run_experiment(cfg)
        if cfg.out:
            write_csv(table, cfg.out)
        if args.dump_trials:
            write_trial_dump(table, args.dump_trials)
        print(format_table(table))
        if args.summary_at is not None:
            print(summarize_gaps(table, args.baseline, args.summary_at))
    except (ValueError, KeyError, OSError, RuntimeError) as e:
        print(f"ia-sim: error: {e}", file=sys.stderr)
        return 1
    if table.nonconverged:
        return EXIT_NONCONVERGED
    return 0


if __name__ == "__main__":
    sys.exit(main())

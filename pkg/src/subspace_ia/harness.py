"""Seeded Monte Carlo sweep of sum rate versus SNR for every scheme."""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel_model import (
    ChannelGenConfig,
    compute_alignment_operator,
    generate_channels,
    trial_seed,
)
from .precoding import build_bases, cj_weights, precoders_from_weights
from .rate_eval import build_effective_matrices, snr_to_power, sum_rate_general
from .schemes import (
    SolverOptions,
    kt_op_weights,
    kt_sop1_weights,
    kt_sop2_weights,
    shv_orthonormalize,
)

log = logging.getLogger(__name__)

SCHEMES = ("cj", "kt-op", "kt-sop1", "kt-sop2")
CSV_HEADER = ("scheme", "snr_db", "mean_sum_rate", "std_err", "trials", "reference")


def dof_per_channel_use(n):
    return (3 * n + 1) / (2 * n + 1)


def reference_line(n, snr_db):
    return dof_per_channel_use(n) * np.log2(snr_to_power(snr_db))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 1
    snr_db_grid: tuple = tuple(float(s) for s in range(0, 55, 5))
    trials: int = 1000
    master_seed: int = 0
    schemes: tuple = SCHEMES
    shv: bool = True
    min_mag: float = 0.1
    max_mag: float = 10.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    out: str = None
    workers: int = 1

    def __post_init__(self):
        grid = tuple(float(s) for s in self.snr_db_grid)
        object.__setattr__(self, "snr_db_grid", grid)
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("SNR grid must be non-empty and strictly increasing")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        ChannelGenConfig(self.n, 0, self.min_mag, self.max_mag)


@dataclass
class TrialResult:
    trial: int
    rates: dict  # scheme -> array over the SNR grid
    nonconverged: list  # SNR points where kt-op did not meet kkt_tol


def run_trial(cfg, trial):
    seed = trial_seed(cfg.master_seed, trial)
    ch = generate_channels(ChannelGenConfig(cfg.n, seed, cfg.min_mag, cfg.max_mag))
    bases = build_bases(ch, compute_alignment_operator(ch))

    def post(prec):
        return shv_orthonormalize(prec) if cfg.shv else prec

    fixed = {}
    if "cj" in cfg.schemes:
        fixed["cj"] = precoders_from_weights(bases, cj_weights(bases, normalize=True))
    if "kt-sop1" in cfg.schemes:
        fixed["kt-sop1"] = post(precoders_from_weights(bases, kt_sop1_weights(ch, bases)))
    if "kt-sop2" in cfg.schemes:
        fixed["kt-sop2"] = post(precoders_from_weights(bases, kt_sop2_weights(bases)))

    grid = cfg.snr_db_grid
    rates = {s: np.empty(len(grid)) for s in cfg.schemes}
    nonconverged = []
    eff = build_effective_matrices(ch, bases) if "kt-op" in cfg.schemes else None
    w_prev = None
    for i, snr in enumerate(grid):
        p = float(snr_to_power(snr))
        for s, prec in fixed.items():
            rates[s][i] = sum_rate_general(ch, prec, p).sum
        if eff is not None:
            w, trace = kt_op_weights(eff, bases, p, cfg.solver, w0=w_prev)
            if not trace.converged:
                nonconverged.append(snr)
                log.warning("trial %d: kt-op not converged at %g dB (KKT residual %.3g)",
                            trial, snr, trace.kkt_residual)
            w_prev = w
            rates["kt-op"][i] = sum_rate_general(ch, post(precoders_from_weights(bases, w)), p).sum
    return TrialResult(trial, rates, nonconverged)


def _run_trial_star(args):
    return run_trial(*args)


@dataclass
class ResultTable:
    n: int
    snr_db_grid: tuple
    mean: dict
    std_err: dict
    trials: int
    samples: dict = None  # scheme -> (trials, len(grid)) array, absent after CSV round-trip
    nonconverged: dict = field(default_factory=dict)  # trial -> list of SNRs

    @property
    def schemes(self):
        return tuple(sorted(self.mean))

    def reference(self, snr_db):
        return float(reference_line(self.n, snr_db))

    def rows(self):
        for s in self.schemes:
            for i, snr in enumerate(self.snr_db_grid):
                yield (s, snr, float(self.mean[s][i]), float(self.std_err[s][i]),
                       self.trials, self.reference(snr))

    def value(self, scheme, snr_db):
        i = self._index(snr_db)
        return float(self.mean[scheme][i]), float(self.std_err[scheme][i])

    def _index(self, snr_db):
        for i, s in enumerate(self.snr_db_grid):
            if abs(s - snr_db) < 1e-9:
                return i
        raise KeyError(f"SNR {snr_db} dB not on the grid {self.snr_db_grid}")


def aggregate(n, grid, schemes, results):
    results = sorted(results, key=lambda r: r.trial)
    T = len(results)
    samples = {s: np.array([r.rates[s] for r in results]) for s in schemes}
    mean = {s: v.mean(axis=0) for s, v in samples.items()}
    if T > 1:
        se = {s: v.std(axis=0, ddof=1) / np.sqrt(T) for s, v in samples.items()}
    else:
        se = {s: np.zeros(len(grid)) for s in schemes}
    bad = {r.trial: r.nonconverged for r in results if r.nonconverged}
    return ResultTable(n, tuple(grid), mean, se, T, samples, bad)


def run_experiment(cfg):
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_run_trial_star, jobs, chunksize=max(1, cfg.trials // (8 * cfg.workers))))
    else:
        results = [run_trial(c, t) for c, t in jobs]
    table = aggregate(cfg.n, cfg.snr_db_grid, cfg.schemes, results)
    if table.nonconverged:
        log.warning("kt-op did not converge in %d of %d trials", len(table.nonconverged), cfg.trials)
    return table


def _fmt(x):
    return f"{x:.10g}"


def write_csv(table, path):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for s, snr, m, se, t, ref in table.rows():
                w.writerow([s, _fmt(snr), _fmt(m), _fmt(se), t, _fmt(ref)])
    except OSError as e:
        raise OSError(f"cannot write results to {path}: {e}") from e


def read_csv(path, n):
    """Parse a CSV written by ``write_csv`` back into a ``ResultTable``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    grid = sorted({float(r["snr_db"]) for r in rows})
    mean, se = {}, {}
    trials = 0
    for r in rows:
        s = r["scheme"]
        i = grid.index(float(r["snr_db"]))
        mean.setdefault(s, np.full(len(grid), np.nan))[i] = float(r["mean_sum_rate"])
        se.setdefault(s, np.full(len(grid), np.nan))[i] = float(r["std_err"])
        trials = int(r["trials"])
    return ResultTable(n, tuple(grid), mean, se, trials)


def write_trial_dump(table, path):
    """Opt-in per-trial dump: one row per (trial, scheme, snr)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("trial", "scheme", "snr_db", "sum_rate"))
        for s in table.schemes:
            for t, row in enumerate(table.samples[s]):
                for snr, v in zip(table.snr_db_grid, row):
                    w.writerow([t, s, _fmt(snr), _fmt(v)])


@dataclass(frozen=True)
class GapReport:
    baseline: str
    snr_db: float
    gaps: dict  # scheme -> (mean gap, combined standard error)

    def __str__(self):
        lines = [f"gaps vs {self.baseline} at {self.snr_db:g} dB (bits/s/Hz):"]
        for s, (g, e) in sorted(self.gaps.items()):
            lines.append(f"  {s:8s} {g:+.4f} +/- {e:.4f}")
        return "\n".join(lines)


def summarize_gaps(table, baseline, at):
    if baseline not in table.mean:
        raise KeyError(f"baseline scheme {baseline!r} not in table")
    b_mean, b_se = table.value(baseline, at)
    gaps = {}
    for s in table.schemes:
        m, se = table.value(s, at)
        if s == baseline:
            gaps[s] = (0.0, 0.0)
        else:
            gaps[s] = (m - b_mean, float(np.hypot(se, b_se)))
    return GapReport(baseline, float(at), gaps)


def fitted_slope(table, scheme, lo_db, hi_db):
    """Least-squares slope of mean rate against log2(snr) on [lo_db, hi_db]."""
    grid = np.array(table.snr_db_grid)
    sel = (grid >= lo_db - 1e-9) & (grid <= hi_db + 1e-9)
    if sel.sum() < 2:
        raise ValueError("need at least two grid points to fit a slope")
    x = np.log2(snr_to_power(grid[sel]))
    return float(np.polyfit(x, table.mean[scheme][sel], 1)[0])


def format_table(table):
    lines = [f"n={table.n} (N={2 * table.n + 1}), {table.trials} trials, "
             f"reference slope D_N={dof_per_channel_use(table.n):.6g}"]
    lines.append(f"{'snr_db':>7s} " + " ".join(f"{s:>10s}" for s in table.schemes) + f" {'reference':>10s}")
    for i, snr in enumerate(table.snr_db_grid):
        vals = " ".join(f"{table.mean[s][i]:10.4f}" for s in table.schemes)
        lines.append(f"{snr:7.2f} {vals} {table.reference(snr):10.4f}")
    return "\n".join(lines)

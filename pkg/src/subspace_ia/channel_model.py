"""Seeded bounded channel generation and the alignment operator T.

Links are stored zero-based: ``coeffs[k, j]`` holds the N diagonal
coefficients of the link from transmitter ``j`` to receiver ``k``, so the
paper-style ``H_12`` is ``coeffs[0, 1]``.
"""

from dataclasses import dataclass

import numpy as np

MAX_REDRAWS = 10**6
_DENOM_GUARD = 1e-12


class DegenerateChannelError(ValueError):
    """Raised when a channel configuration or realization cannot be used."""


@dataclass(frozen=True)
class ChannelGenConfig:
    n: int = 1
    seed: int = 0
    min_mag: float = 0.1
    max_mag: float = 10.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a natural number >= 1, got {self.n!r}")
        if not (0 < self.min_mag < self.max_mag < np.inf):
            raise ValueError(
                f"need 0 < min_mag < max_mag < inf, got [{self.min_mag}, {self.max_mag}]"
            )

    @property
    def N(self):
        return 2 * self.n + 1


@dataclass(frozen=True)
class ChannelSet:
    coeffs: np.ndarray  # (3, 3, N) complex
    n: int

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (3, 3, 2 * self.n + 1):
            raise ValueError(f"coeffs must have shape (3, 3, {2 * self.n + 1}), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self):
        return 2 * self.n + 1

    def link(self, k, j):
        """Diagonal of H_kj with the paper's 1-based indices."""
        return self.coeffs[k - 1, j - 1]

    @classmethod
    def constant(cls, n, value=1.0):
        """All nine links equal to ``value`` on every diagonal entry."""
        return cls(np.full((3, 3, 2 * n + 1), value, dtype=complex), n)


@dataclass(frozen=True)
class AlignmentOperator:
    """Diagonal of T and its powers.

    ``powers[m]`` is diag(T^m) for m = 0..n; row 0 is all ones.
    """

    t_diag: np.ndarray
    powers: np.ndarray

    @property
    def n(self):
        return self.powers.shape[0] - 1


def trial_seed(master_seed, trial):
    """Seed for one Monte Carlo trial; independent of execution order."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generate_channels(cfg):
    """Draw nine i.i.d. CN(0, 1) coefficient vectors with bounded magnitude.

    Coefficients outside ``[min_mag, max_mag]`` are redrawn, which leaves a
    truncated complex Gaussian without probability atoms at the bounds.
    """
    rng = np.random.default_rng(cfg.seed)
    shape = (3, 3, cfg.N)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    bad = (np.abs(h) < cfg.min_mag) | (np.abs(h) > cfg.max_mag)
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > MAX_REDRAWS:
            raise DegenerateChannelError(
                f"could not draw coefficients within [{cfg.min_mag}, {cfg.max_mag}] "
                f"after {MAX_REDRAWS} attempts"
            )
        m = int(bad.sum())
        h[bad] = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2)
        bad = (np.abs(h) < cfg.min_mag) | (np.abs(h) > cfg.max_mag)
    return ChannelSet(h, cfg.n)


def compute_alignment_operator(ch):
    h = ch.coeffs
    num = h[0, 1] * h[1, 2] * h[2, 0]
    den = h[1, 0] * h[2, 1] * h[0, 2]
    if np.min(np.abs(den)) < _DENOM_GUARD:
        raise DegenerateChannelError("alignment operator denominator is numerically zero")
    t = num / den
    powers = t[None, :] ** np.arange(ch.n + 1)[:, None]
    if not np.all(np.isfinite(powers)) or np.any(powers == 0):
        raise DegenerateChannelError("powers of T overflow or underflow")
    t.setflags(write=False)
    powers.setflags(write=False)
    return AlignmentOperator(t, powers)

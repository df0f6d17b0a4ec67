"""Precoding bases, weighted precoders and alignment checks."""

from dataclasses import dataclass

import numpy as np

from ._linalg import containment_residual

ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class SubspaceBases:
    """The w-independent bases Gamma_1 (N x (n+1)), Gamma_2, Gamma_3 (N x n).

    ``row_norms_sq[k, i]`` is the squared norm of row i of Gamma_{k+1}.
    """

    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    row_norms_sq: np.ndarray

    @property
    def gammas(self):
        return (self.gamma1, self.gamma2, self.gamma3)

    @property
    def N(self):
        return self.gamma1.shape[0]

    @property
    def n(self):
        return self.gamma2.shape[1]

    @property
    def base_norms(self):
        """Sum over users of the squared row norms, one value per row."""
        return self.row_norms_sq.sum(axis=0)

    def power(self, w_tilde):
        """Total transmit power sum_k Tr[Gamma_k^H diag(w) Gamma_k]."""
        return float(np.dot(w_tilde, self.base_norms))


@dataclass(frozen=True)
class WeightVector:
    """Squared diagonal of W. Entries are nonnegative; the optimal solver may
    drive some to zero, the closed forms never do."""

    w_tilde: np.ndarray

    def __post_init__(self):
        w = np.array(self.w_tilde, dtype=float).ravel()
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("w_tilde must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "w_tilde", w)

    def __len__(self):
        return len(self.w_tilde)

    @property
    def w(self):
        return np.sqrt(self.w_tilde)

    @classmethod
    def ones(cls, N):
        return cls(np.ones(N))


@dataclass(frozen=True)
class PrecoderSet:
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray

    def __post_init__(self):
        n = self.v2.shape[1]
        if self.v1.shape[1] != n + 1 or self.v3.shape[1] != n:
            raise ValueError("precoders must have n+1, n, n columns")

    @property
    def vs(self):
        return (self.v1, self.v2, self.v3)

    def powers(self):
        return tuple(float(np.sum(np.abs(v) ** 2)) for v in self.vs)


@dataclass(frozen=True)
class AlignmentReport:
    """Residuals of the three alignment constraints.

    ``matrix_residuals`` compare the constrained matrices column by column,
    relative to the larger of the two column magnitudes. ``subspace_residuals``
    are sines of the largest principal angle (span equality at receiver 1,
    span containment at receivers 2 and 3) and stay meaningful after the
    columns have been mixed by an invertible transform.
    """

    matrix_residuals: tuple
    subspace_residuals: tuple
    tol: float

    @property
    def passed(self):
        return max(self.matrix_residuals) < self.tol

    def spans_aligned(self, tol=1e-8):
        return max(self.subspace_residuals) < tol


def build_bases(ch, t):
    if ch.n != t.n:
        raise ValueError(f"channel n={ch.n} does not match operator n={t.n}")
    n, h = ch.n, ch.coeffs
    P = t.powers.T  # (N, n+1), column m is t_m
    gamma1 = P.copy()
    gamma2 = (h[2, 0] / h[2, 1])[:, None] * P[:, :n]
    gamma3 = (h[1, 0] / h[1, 2])[:, None] * P[:, 1:]
    norms = np.array([np.sum(np.abs(g) ** 2, axis=1) for g in (gamma1, gamma2, gamma3)])
    return SubspaceBases(gamma1, gamma2, gamma3, norms)


def precoders_from_weights(bases, w):
    if len(w) != bases.N:
        raise ValueError(f"weight length {len(w)} does not match N={bases.N}")
    s = w.w[:, None]
    return PrecoderSet(*(s * g for g in bases.gammas))


def cj_weights(bases, normalize=True):
    """All-ones weights, optionally scaled so the total power is 3N."""
    if not normalize:
        return WeightVector.ones(bases.N)
    alpha = 3 * bases.N / bases.base_norms.sum()
    return WeightVector(np.full(bases.N, alpha))


def cj_precoders(ch, t, normalize=True):
    bases = build_bases(ch, t)
    return precoders_from_weights(bases, cj_weights(bases, normalize))


def _column_residual(A, B):
    scale = np.maximum(np.max(np.abs(A), axis=0), np.max(np.abs(B), axis=0))
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.max(np.abs(A - B), axis=0) / scale))


def verify_alignment(ch, prec, tol=ALIGN_TOL):
    h = ch.coeffs
    n = prec.v2.shape[1]
    hv = lambda k, j, v: h[k, j][:, None] * v
    a1, b1 = hv(0, 1, prec.v2), hv(0, 2, prec.v3)
    a2, b2 = hv(1, 2, prec.v3), hv(1, 0, prec.v1)
    a3, b3 = hv(2, 1, prec.v2), hv(2, 0, prec.v1)
    matrix = (
        _column_residual(a1, b1),
        _column_residual(a2, b2[:, -n:]),
        _column_residual(a3, b3[:, :n]),
    )
    spans = (
        max(containment_residual(a1, b1), containment_residual(b1, a1)),
        containment_residual(a2, b2),
        containment_residual(a3, b3),
    )
    return AlignmentReport(matrix, spans, tol)

"""Weight vectors for the subspace-conditioning schemes and SHV
orthonormalization.

kt-sop2 is the closed form 3 / sum_k ||gamma_ki||^2; kt-sop1 is the
semi-closed form with a scalar multiplier found by root-finding; kt-op
maximizes the exact sum rate over the power-constraint simplex.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .precoding import PrecoderSet, WeightVector
from .rate_eval import rate_and_gradient

INIT_CHOICES = ("uniform-feasible", "sop2-warm-start")
_BASIS_GUARD = 1e-14
_RANK_GUARD = 1e-12
_LAMBDA_MAX = 1e9


class RootNotBracketedError(RuntimeError):
    pass


class RankDeficientError(ValueError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 500
    kkt_tol: float = 1e-7
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    init: str = "sop2-warm-start"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.kkt_tol > 0:
            raise ValueError("kkt_tol must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.armijo_shrink < 1):
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if self.init not in INIT_CHOICES:
            raise ValueError(f"init must be one of {INIT_CHOICES}, got {self.init!r}")


@dataclass(frozen=True)
class SolveTrace:
    iterations: int
    objective: float
    kkt_residual: float
    constraint_residual: float
    converged: bool


def kt_sop2_weights(bases):
    b = bases.base_norms
    if np.any(b < _BASIS_GUARD):
        raise ValueError("degenerate basis: a row of the subspace bases is numerically zero")
    return WeightVector(3.0 / b)


def sop1_terms(ch, bases):
    """Per-row sums A_i = sum_k a_ki and B_i = sum_k b_ki a_ki."""
    N = bases.N
    mag2 = np.abs(ch.coeffs) ** 2
    a = bases.row_norms_sq
    b = np.array([sum(mag2[j, k] for j in range(3) if j != k) for k in range(3)]) / N
    return a.sum(axis=0), (b * a).sum(axis=0)


def kt_sop1_weights(ch, bases):
    N = bases.N
    A, B = sop1_terms(ch, bases)
    target = 3.0 * N

    def excess(lam):
        return np.sum(3.0 / N * A / (lam * A + B)) - target

    lo = np.max(-B / A)
    lo += 1e-12 * max(1.0, abs(lo))
    if not (excess(lo) > 0 > excess(_LAMBDA_MAX)):
        raise RootNotBracketedError(
            f"power constraint root not bracketed in ({lo}, {_LAMBDA_MAX}]"
        )
    lam = brentq(excess, lo, _LAMBDA_MAX, xtol=1e-300, rtol=1e-15, maxiter=1000)
    return WeightVector(3.0 / N / (lam * A + B))


def project_simplex(y, total):
    """Euclidean projection of ``y`` onto {x >= 0, sum(x) = total}."""
    srt = np.sort(y)[::-1]
    mu = (np.cumsum(srt) - total) / np.arange(1, len(y) + 1)
    k = np.nonzero(srt > mu)[0][-1]
    return np.maximum(y - mu[k], 0.0)


def project_weighted_simplex(y, c, total):
    """Euclidean projection of ``y`` onto {x >= 0, c . x = total}, c > 0.

    The solution is max(y - mu c, 0); sorting the breakpoints y_i / c_i
    gives mu exactly.
    """
    r = y / c
    order = np.argsort(-r)
    mu = (np.cumsum((c * y)[order]) - total) / np.cumsum((c * c)[order])
    k = np.nonzero(r[order] > mu)[0][-1]
    return np.maximum(y - mu[k] * c, 0.0)


def kkt_residual(grad_scaled, active):
    """Largest violation of the stationarity conditions.

    ``grad_scaled[i]`` is (1/c_i) df/dw_i. Active coordinates must share a
    common value lambda*, inactive ones must not exceed it.
    """
    lam = grad_scaled[active].mean()
    res = np.max(np.abs(grad_scaled[active] - lam))
    if not active.all():
        res = max(res, float(np.max(grad_scaled[~active] - lam)))
        res = max(res, 0.0)
    return float(res), float(lam)


def kt_op_weights(eff, bases, p, opts=SolverOptions(), w0=None):
    """Maximize the compact sum rate subject to sum_i c_i w_i = 3N, w >= 0.

    Spectral (Barzilai-Borwein) projected gradient ascent with Armijo
    backtracking. Iterates live in u = c * w / 3, where the feasible set is
    the plain simplex sum(u) = N and kt-sop2 sits at u = 1; the row norms
    c_i can span tens of decades, so working in w directly stalls.

    Returns the weight vector and a ``SolveTrace``; non-convergence is
    reported in the trace, not raised.
    """
    if not p > 0:
        raise ValueError(f"transmit power p must be positive, got {p}")
    c = bases.base_norms
    N = bases.N
    eff_u = eff.scaled_rows(np.sqrt(3.0 / c))

    if w0 is not None:
        u = c * np.asarray(getattr(w0, "w_tilde", w0), dtype=float) / 3.0
        u = project_simplex(u, N)
    elif opts.init == "sop2-warm-start":
        u = np.ones(N)
    else:
        u = c * (N / c.sum())

    f, g = rate_and_gradient(eff_u, u, p)
    res, _ = kkt_residual(g / 3.0, u > 0)
    alpha = 1.0
    it = 0
    while res >= opts.kkt_tol and it < opts.max_iters:
        it += 1
        d = project_simplex(u + alpha * g, N) - u
        slope = float(g @ d)
        if slope <= 0:
            break
        t = 1.0
        while True:
            u_new = u + t * d
            f_new, g_new = rate_and_gradient(eff_u, u_new, p)
            if f_new >= f + opts.armijo_c * t * slope:
                break
            t *= opts.armijo_shrink
            if t < 1e-12:
                break
        if f_new < f:
            break
        s, y = u_new - u, g_new - g
        u, f, g = u_new, f_new, g_new
        sy = float(s @ y)
        alpha = float(s @ s) / -sy if sy < 0 else 1e3
        alpha = min(max(alpha, 1e-10), 1e10)
        res, _ = kkt_residual(g / 3.0, u > 0)

    w = 3.0 * u / c
    trace = SolveTrace(
        iterations=it,
        objective=float(f),
        kkt_residual=res,
        constraint_residual=float(abs(np.dot(w, c) - 3 * N)),
        converged=res < opts.kkt_tol,
    )
    return WeightVector(w), trace


def shv_orthonormalize(prec):
    """Orthogonalize the columns of V_2 and V_3 with N/n power per column.

    V_1 is returned unchanged. Spans of V_2 and V_3 are preserved, so the
    aligned interference subspaces are too.
    """
    N, n = prec.v2.shape
    out = []
    for v in (prec.v2, prec.v3):
        Q, R = np.linalg.qr(v)
        d = np.abs(np.diag(R))
        if d.min() < _RANK_GUARD * d.max():
            raise RankDeficientError("precoder has numerical rank below n")
        out.append(Q * np.sqrt(N / n))
    return PrecoderSet(prec.v1, out[0], out[1])

"""Small numerical kernels shared by the rate and precoding modules."""

import numpy as np
from scipy.linalg import solve_triangular

LN2 = np.log(2.0)


def logdet_gram(X, p):
    """Return ``(log det(I + p X^H X), Q_top, R)`` in nats.

    Uses a QR factorization of the stacked matrix ``[sqrt(p) X; I]``: then
    ``I + p X^H X = R^H R`` and ``sqrt(p) X R^{-1} = Q_top``. Householder QR is
    column-wise backward stable, which matters when the columns of X span
    many orders of magnitude (Vandermonde-like bases in T).
    """
    m = X.shape[1]
    if m == 0:
        return 0.0, np.zeros((X.shape[0], 0), dtype=complex), np.zeros((0, 0), dtype=complex)
    Q, R = np.linalg.qr(np.vstack([np.sqrt(p) * X, np.eye(m)]))
    return 2.0 * np.sum(np.log(np.abs(np.diag(R)))), Q[: X.shape[0]], R


def logdet_gram_row_grad(G, x, p):
    """log det(I + p G^H diag(x) G) and its gradient with respect to ``x``.

    The gradient entry i is ``p g_i (I + p G^H diag(x) G)^{-1} g_i^H`` with
    ``g_i`` row i of G. Rows with x_i > 0 use the Q factor directly; rows
    with x_i == 0 need a triangular solve.
    """
    ld, Qt, R = logdet_gram(np.sqrt(x)[:, None] * G, p)
    grad = np.empty(G.shape[0])
    pos = x > 0
    grad[pos] = np.sum(np.abs(Qt[pos]) ** 2, axis=1) / x[pos]
    if not pos.all():
        Z = solve_triangular(R, np.sqrt(p) * G[~pos].conj().T, trans="C")
        grad[~pos] = np.sum(np.abs(Z) ** 2, axis=0)
    return ld, grad


def logdet_square(G):
    """log det(G G^H) for square G, in nats; -inf when G is singular."""
    R = np.linalg.qr(G, mode="r")
    with np.errstate(divide="ignore"):
        return 2.0 * np.sum(np.log(np.abs(np.diag(R))))


def orth_basis(A):
    """Orthonormal basis of the column span of a full-rank A (thin QR)."""
    return np.linalg.qr(A)[0]


def containment_residual(A, B):
    """Sine of the largest principal angle between span(A) and its best match
    in span(B); zero iff span(A) is contained in span(B)."""
    Qa, Qb = orth_basis(A), orth_basis(B)
    return float(np.linalg.norm(Qa - Qb @ (Qb.conj().T @ Qa), 2))

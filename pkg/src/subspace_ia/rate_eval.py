"""Achievable MMSE sum rate (direct and compact forms) and its high-SNR
lower bound.

All rates are in bits per channel use, i.e. already divided by N.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import LN2, logdet_gram, logdet_gram_row_grad, logdet_square
from .precoding import precoders_from_weights

SQRT2 = np.sqrt(2.0)
# Rates below zero by less than this are rounding noise.
_NEG_FLOOR = 1e-9


def snr_to_power(snr_db):
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)


def power_to_snr_db(p):
    return 10.0 * np.log10(p)


@dataclass(frozen=True)
class EffectiveMatrices:
    g1n: np.ndarray
    g1d: np.ndarray
    g2n: np.ndarray
    g2d: np.ndarray
    g3n: np.ndarray
    g3d: np.ndarray

    @property
    def gn(self):
        return (self.g1n, self.g2n, self.g3n)

    @property
    def gd(self):
        return (self.g1d, self.g2d, self.g3d)

    @property
    def N(self):
        return self.g1n.shape[0]

    def scaled_rows(self, s):
        """Same matrices with row i multiplied by ``s[i]``."""
        s = np.asarray(s)[:, None]
        return EffectiveMatrices(*(s * g for g in (self.g1n, self.g1d, self.g2n,
                                                   self.g2d, self.g3n, self.g3d)))


@dataclass(frozen=True)
class LowerBoundContext:
    """Instance constants of the high-SNR lower bound.

    ``sum_logdet_gn`` is in nats. ``c_ki`` has shape (3, N).
    """

    c_max: float
    c_ki: np.ndarray
    sum_logdet_gn: float
    base_norms: np.ndarray


@dataclass(frozen=True)
class RateReport:
    per_user: np.ndarray
    snr_db: float
    scheme: str = ""

    @property
    def sum(self):
        return float(np.sum(self.per_user))


def _pair_scale(n):
    p2 = np.r_[1.0, np.full(n, SQRT2)]
    p3 = np.r_[np.full(n, SQRT2), 1.0]
    return p2, p3


def build_effective_matrices(ch, bases):
    h, n = ch.coeffs, bases.n
    g1, g2, g3 = bases.gammas
    p2, p3 = _pair_scale(n)
    g1d = SQRT2 * h[0, 1][:, None] * g2
    g2d = h[1, 0][:, None] * g1 * p2
    g3d = h[2, 0][:, None] * g1 * p3
    return EffectiveMatrices(
        g1n=np.hstack([h[0, 0][:, None] * g1, g1d]),
        g1d=g1d,
        g2n=np.hstack([h[1, 1][:, None] * g2, g2d]),
        g2d=g2d,
        g3n=np.hstack([h[2, 2][:, None] * g3, g3d]),
        g3d=g3d,
    )


def _report(per_user_nats, N, p, scheme):
    r = np.asarray(per_user_nats) / (N * LN2)
    r = np.where((r < 0) & (r > -_NEG_FLOOR), 0.0, r)
    return RateReport(r, float(power_to_snr_db(p)), scheme)


def _check_power(p):
    if not p > 0:
        raise ValueError(f"transmit power p must be positive, got {p}")


def sum_rate_general(ch, prec, p, scheme=""):
    """MMSE sum rate for arbitrary precoders V_1, V_2, V_3."""
    _check_power(p)
    h = ch.coeffs
    vs = prec.vs
    per_user = []
    for k in range(3):
        rx = [h[k, j][:, None] * vs[j] for j in range(3)]
        total = logdet_gram(np.hstack(rx), p)[0]
        interf = logdet_gram(np.hstack([rx[j] for j in range(3) if j != k]), p)[0]
        per_user.append(total - interf)
    return _report(per_user, ch.N, p, scheme)


def sum_rate_direct(ch, bases, w, p, scheme=""):
    """Sum rate with precoders W Gamma_k built from the weight vector."""
    return sum_rate_general(ch, precoders_from_weights(bases, w), p, scheme)


def _w_array(w):
    return np.asarray(getattr(w, "w_tilde", w), dtype=float)


def sum_rate_compact(eff, w, p, scheme=""):
    """Sum rate through the effective matrices G_kn, G_kd."""
    _check_power(p)
    x = _w_array(w)
    s = np.sqrt(x)[:, None]
    per_user = [
        logdet_gram(s * gn, p)[0] - logdet_gram(s * gd, p)[0]
        for gn, gd in zip(eff.gn, eff.gd)
    ]
    return _report(per_user, eff.N, p, scheme)


def rate_and_gradient(eff, x, p):
    """Compact sum rate (bits) and its gradient with respect to the row
    weights ``x`` (bits per unit weight)."""
    x = _w_array(x)
    f = 0.0
    g = np.zeros(len(x))
    for gn, gd in zip(eff.gn, eff.gd):
        ln, gradn = logdet_gram_row_grad(gn, x, p)
        ld, gradd = logdet_gram_row_grad(gd, x, p)
        f += ln - ld
        g += gradn - gradd
    scale = 1.0 / (eff.N * LN2)
    return f * scale, g * scale


def sum_rate_gradient(eff, w, p):
    _check_power(p)
    return rate_and_gradient(eff, w, p)[1]


def compute_lb_context(ch, eff, bases):
    mag2 = np.abs(ch.coeffs) ** 2  # mag2[j, k] = |H_jk|^2
    c_ki = np.array([sum(mag2[j, k] for j in range(3) if j != k) for k in range(3)])
    sum_ld = sum(logdet_square(g) for g in eff.gn)
    return LowerBoundContext(
        c_max=float(c_ki.max()),
        c_ki=c_ki,
        sum_logdet_gn=float(sum_ld),
        base_norms=bases.base_norms,
    )


def lower_bound(eff, ctx, bases, w, p):
    """High-SNR lower bound on the sum rate, in bits per channel use.

    The trace penalty comes from ``x > ln x`` and so is divided by ln 2
    along with the other natural-log terms.
    """
    _check_power(p)
    x = _w_array(w)
    if np.any(x <= 0):
        raise ValueError("lower bound needs strictly positive weights")
    N, n = bases.N, bases.n
    return float(
        (3 * n + 1) / N * np.log2(p)
        + 3.0 / N * np.sum(np.log2(x))
        + ctx.sum_logdet_gn / (N * LN2)
        - ctx.c_max / (N * LN2) * np.dot(x, ctx.base_norms)
    )


def lb_lagrangian_gradient(ctx, w, lam):
    """Gradient of the lower-bound Lagrangian in w (natural-log units)."""
    x = _w_array(w)
    N = len(x)
    return 3.0 / N / x - (ctx.c_max / N + lam) * ctx.base_norms

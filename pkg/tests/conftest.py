import numpy as np
import pytest

from subspace_ia import (
    ChannelGenConfig,
    WeightVector,
    build_bases,
    build_effective_matrices,
    compute_alignment_operator,
    generate_channels,
)


class Instance:
    def __init__(self, ch):
        self.ch = ch
        self.t = compute_alignment_operator(ch)
        self.bases = build_bases(ch, self.t)
        self.eff = build_effective_matrices(ch, self.bases)

    @property
    def N(self):
        return self.ch.N

    @property
    def n(self):
        return self.ch.n


def make_instance(n, seed, min_mag=0.1, max_mag=10.0):
    return Instance(generate_channels(ChannelGenConfig(n, seed, min_mag, max_mag)))


def random_feasible(bases, rng, spread=1.0):
    """Random strictly positive weights meeting the 3N power constraint."""
    x = np.exp(spread * rng.standard_normal(bases.N)) / bases.base_norms
    return WeightVector(x * 3 * bases.N / np.dot(x, bases.base_norms))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense(d):
    return np.diag(d)


def dense_rate_bits(ch, prec, p):
    """Independent evaluation of the MMSE sum rate with explicit N x N
    covariances and slogdet."""
    H = [[dense(ch.coeffs[k, j]) for j in range(3)] for k in range(3)]
    N = ch.N
    total = 0.0
    for k in range(3):
        cov = [H[k][j] @ prec.vs[j] @ prec.vs[j].conj().T @ H[k][j].conj().T for j in range(3)]
        s = np.linalg.slogdet(np.eye(N) + p * sum(cov))[1]
        i = np.linalg.slogdet(np.eye(N) + p * sum(cov[j] for j in range(3) if j != k))[1]
        total += s - i
    return total / N / np.log(2)

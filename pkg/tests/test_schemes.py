import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from subspace_ia import (
    ChannelSet,
    PrecoderSet,
    SolverOptions,
    WeightVector,
    compute_lb_context,
    kt_op_weights,
    kt_sop1_weights,
    kt_sop2_weights,
    lower_bound,
    precoders_from_weights,
    shv_orthonormalize,
    sum_rate_compact,
    sum_rate_gradient,
)
from subspace_ia.rate_eval import lb_lagrangian_gradient
from subspace_ia.schemes import (
    RankDeficientError,
    project_simplex,
    project_weighted_simplex,
    sop1_terms,
)
from conftest import Instance, make_instance, random_feasible


def constraint_rel(bases, w):
    return abs(bases.power(w.w_tilde) - 3 * bases.N) / (3 * bases.N)


# -- kt-sop2 --------------------------------------------------------------

def test_sop2_identity():
    inst = Instance(ChannelSet.constant(1))
    w = kt_sop2_weights(inst.bases)
    assert np.allclose(w.w_tilde, 0.75)
    assert inst.bases.power(w.w_tilde) == pytest.approx(9.0)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_sop2_constraint(n):
    for seed in range(10):
        inst = make_instance(n, seed)
        assert constraint_rel(inst.bases, kt_sop2_weights(inst.bases)) < 1e-12


@pytest.mark.parametrize("n", [1, 3])
def test_sop2_lagrangian_stationary(n):
    for seed in range(10):
        inst = make_instance(n, seed)
        ctx = compute_lb_context(inst.ch, inst.eff, inst.bases)
        w = kt_sop2_weights(inst.bases)
        lam = (1 - ctx.c_max) / inst.N
        grad = lb_lagrangian_gradient(ctx, w, lam)
        # each term is of size base_norms / N
        assert np.max(np.abs(grad) / (inst.bases.base_norms / inst.N)) < 1e-10


def test_sop2_maximizes_lower_bound(rng):
    for seed in range(10):
        inst = make_instance(1 + seed % 3, seed)
        ctx = compute_lb_context(inst.ch, inst.eff, inst.bases)
        w = kt_sop2_weights(inst.bases)
        best = lower_bound(inst.eff, ctx, inst.bases, w, 1e3)
        for _ in range(20):
            x = w.w_tilde * np.exp(0.3 * rng.standard_normal(inst.N))
            x *= 3 * inst.N / inst.bases.power(x)
            assert lower_bound(inst.eff, ctx, inst.bases, WeightVector(x), 1e3) < best


def test_sop2_degenerate_basis():
    inst = make_instance(1, seed=0)
    b = inst.bases
    bad = type(b)(b.gamma1, b.gamma2, b.gamma3, np.zeros_like(b.row_norms_sq))
    with pytest.raises(ValueError):
        kt_sop2_weights(bad)


# -- kt-sop1 --------------------------------------------------------------

def test_sop1_identity_hand_solution():
    # A_i = 4, b_ki = 2/3, B_i = 8/3: (3/3) * 3 * 4 / (4 lam + 8/3) = 9 gives lam = -1/3
    inst = Instance(ChannelSet.constant(1))
    A, B = sop1_terms(inst.ch, inst.bases)
    assert np.allclose(A, 4.0) and np.allclose(B, 8 / 3)
    w = kt_sop1_weights(inst.ch, inst.bases)
    assert np.allclose(w.w_tilde, 0.75, rtol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_sop1_feasible_and_of_closed_form(n):
    for seed in range(20):
        inst = make_instance(n, seed)
        w = kt_sop1_weights(inst.ch, inst.bases)
        assert np.all(w.w_tilde > 0)
        assert constraint_rel(inst.bases, w) < 1e-8
        # every coordinate must share one multiplier: (3/(N w_i) - B_i) / A_i
        A, B = sop1_terms(inst.ch, inst.bases)
        lam = (3 / (inst.N * w.w_tilde) - B) / A
        assert np.ptp(lam) <= 1e-8 * max(1.0, np.max(np.abs(lam)))
        assert lam.min() > np.max(-B / A)


# -- projections ----------------------------------------------------------

def bisect_projection(y, c, total):
    lo, hi = np.min(y / c) - total / np.sum(c * c) - 1.0, np.max(y / c)
    for _ in range(200):
        mu = (lo + hi) / 2
        if np.sum(c * np.maximum(y - mu * c, 0)) > total:
            lo = mu
        else:
            hi = mu
    return np.maximum(y - hi * c, 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.integers(0, 1000),
       st.floats(0.1, 50))
def test_weighted_projection_matches_bisection(ys, seed, total):
    y = np.array(ys)
    c = np.random.default_rng(seed).uniform(0.1, 5, len(y))
    x = project_weighted_simplex(y, c, total)
    assert np.all(x >= 0)
    assert np.dot(c, x) == pytest.approx(total, rel=1e-10)
    assert np.allclose(x, bisect_projection(y, c, total), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.floats(0.1, 50))
def test_simplex_projection(ys, total):
    y = np.array(ys)
    x = project_simplex(y, total)
    assert np.all(x >= 0)
    assert x.sum() == pytest.approx(total, rel=1e-10)
    assert np.allclose(x, project_weighted_simplex(y, np.ones(len(y)), total), atol=1e-9)


# -- kt-op ----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5])
@pytest.mark.parametrize("snr_db", [10, 50])
def test_kt_op_dominates_closed_forms(n, snr_db):
    p = 10 ** (snr_db / 10)
    for seed in range(8):
        inst = make_instance(n, seed)
        w, trace = kt_op_weights(inst.eff, inst.bases, p)
        assert trace.converged and trace.kkt_residual < 1e-6
        assert trace.constraint_residual < 1e-8 * 3 * inst.N
        f = sum_rate_compact(inst.eff, w, p).sum
        assert f == pytest.approx(trace.objective, rel=1e-10)
        for other in (kt_sop1_weights(inst.ch, inst.bases), kt_sop2_weights(inst.bases)):
            assert f >= sum_rate_compact(inst.eff, other, p).sum - 1e-6


def test_kt_op_init_independent():
    inst = make_instance(2, seed=3)
    wa, ta = kt_op_weights(inst.eff, inst.bases, 1e3, SolverOptions(init="sop2-warm-start"))
    wb, tb = kt_op_weights(inst.eff, inst.bases, 1e3, SolverOptions(init="uniform-feasible"))
    assert ta.converged and tb.converged
    assert ta.objective == pytest.approx(tb.objective, abs=1e-9)


def test_kt_op_reports_nonconvergence():
    inst = make_instance(2, seed=3)
    _, trace = kt_op_weights(inst.eff, inst.bases, 1e3, SolverOptions(max_iters=1, kkt_tol=1e-14))
    assert not trace.converged
    assert trace.iterations == 1
    assert np.isfinite(trace.objective) and trace.kkt_residual > 0


def test_kt_op_kkt_conditions():
    p = 10.0
    for seed in range(20):
        inst = make_instance(1, seed)
        opts = SolverOptions(kkt_tol=1e-8)
        w, trace = kt_op_weights(inst.eff, inst.bases, p, opts)
        c = inst.bases.base_norms
        r = sum_rate_gradient(inst.eff, w.w_tilde, p) / c
        act = w.w_tilde > 0
        lam = r[act].mean()
        assert np.max(np.abs(r[act] - lam)) < 1e-6
        if not act.all():
            assert np.all(r[~act] <= lam + opts.kkt_tol)


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(max_iters=0)
    with pytest.raises(ValueError):
        SolverOptions(init="random")
    with pytest.raises(ValueError):
        SolverOptions(armijo_c=1.5)


# -- concavity and ordering ------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), theta=st.floats(0.01, 0.99),
       p=st.sampled_from([1.0, 10.0, 1e3, 1e5]))
def test_compact_rate_concave(seed, theta, p):
    inst = make_instance(1 + seed % 2, seed)
    rng = np.random.default_rng(seed)
    wa = random_feasible(inst.bases, rng, 1.5).w_tilde
    wb = random_feasible(inst.bases, rng, 1.5).w_tilde
    f = lambda w: sum_rate_compact(inst.eff, w, p).sum
    mid = f(theta * wa + (1 - theta) * wb)
    assert mid >= theta * f(wa) + (1 - theta) * f(wb) - 1e-9


# -- SHV ------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 4])
def test_shv_properties(n):
    inst = make_instance(n, seed=n)
    prec = precoders_from_weights(inst.bases, kt_sop2_weights(inst.bases))
    out = shv_orthonormalize(prec)
    N = inst.N
    assert out.v1 is prec.v1
    for v_in, v_out in ((prec.v2, out.v2), (prec.v3, out.v3)):
        assert np.allclose(v_out.conj().T @ v_out, N / n * np.eye(n), atol=1e-10)
        assert np.max(subspace_angles(v_in, v_out)) < 1e-8
        assert np.sum(np.abs(v_out) ** 2) == pytest.approx(N, rel=1e-12)


def test_shv_rank_deficient():
    v = np.ones((5, 2))
    with pytest.raises(RankDeficientError):
        shv_orthonormalize(PrecoderSet(np.ones((5, 3)), v, v))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsqnvr.errors import InfeasibleSampling, NotSPD
from rsqnvr.manifolds import GeometryFlavor
from rsqnvr.problems import EntrySet, KarcherProblem, LeastSquaresProblem, MatCompProblem, synth_lowrank

seeds = st.integers(0, 2**32 - 1)
E = np.e


def scalars(*vals):
    return np.array(vals, dtype=float).reshape(-1, 1, 1)


def directional_fd(problem, w, xi, h=1e-6):
    M = problem.manifold
    return (problem.cost(M.retract(w, h * xi)) - problem.cost(M.retract(w, -h * xi))) / (2 * h)


# Karcher


def test_karcher_cost_examples():
    P = KarcherProblem(scalars(E))
    assert np.isclose(P.cost(np.eye(1)), 1.0)
    assert np.isclose(P.cost(np.array([[E]])), 0.0, atol=1e-28)
    P2 = KarcherProblem(scalars(1.0, E**2))
    assert np.isclose(P2.cost(np.array([[E]])), 1.0)


def test_karcher_grad_examples():
    P = KarcherProblem(scalars(E))
    assert np.isclose(P.grad(np.eye(1))[0, 0], -2.0)
    Q = KarcherProblem.random(3, 4, np.random.default_rng(0)).Q
    P = KarcherProblem(np.repeat(Q[:1], 3, axis=0))
    assert np.allclose(P.grad(Q[0]), 0.0, atol=1e-12)


def test_karcher_rejects_non_spd_samples():
    with pytest.raises(NotSPD):
        KarcherProblem(scalars(1.0, -1.0))


@given(seeds, st.integers(1, 4), st.integers(1, 8))
def test_karcher_mean_of_singletons_is_full_grad(seed, d, N):
    rng = np.random.default_rng(seed)
    P = KarcherProblem.random(d, N, rng)
    X = P.manifold.random_point(rng)
    singles = np.mean([P.grad(X, [n]) for n in range(N)], axis=0)
    assert np.allclose(singles, P.grad(X), atol=1e-12 * max(1.0, np.abs(singles).max()))


@pytest.mark.parametrize("retraction", ["exponential", "second_order"])
def test_karcher_gradient_finite_difference(retraction):
    rng = np.random.default_rng(1)
    P = KarcherProblem.random(3, 10, rng, flavor=GeometryFlavor(retraction, "parallel"))
    M = P.manifold
    for _ in range(5):
        X = M.random_point(rng)
        xi = M.random_tangent(X, rng)
        exact = M.inner(X, P.grad(X), xi)
        assert np.isclose(directional_fd(P, X, xi), exact, rtol=1e-5, atol=1e-8)


def test_karcher_cost_is_mean_squared_distance():
    rng = np.random.default_rng(2)
    P = KarcherProblem.random(3, 6, rng)
    X = P.manifold.random_point(rng)
    ref = np.mean([P.manifold.dist(X, Q) ** 2 for Q in P.Q])
    assert np.isclose(P.cost(X), ref, rtol=1e-9)


# matrix completion


def full_problem(d, N, r, rng, dense=None, frac=1.0):
    U0 = np.linalg.qr(rng.standard_normal((d, r)))[0]
    C = rng.standard_normal((r, N))
    X = U0 @ C
    mask = rng.random((d, N)) < frac
    mask[rng.integers(0, d, N), np.arange(N)] = True
    rows, cols = np.nonzero(mask)
    return MatCompProblem(d, N, r, EntrySet(rows, cols, X[rows, cols]), dense=dense), U0, C, X


def test_fully_observed_column_recovers_coefficients():
    P, U0, C, _ = full_problem(8, 5, 2, np.random.default_rng(3))
    assert np.allclose(P.solve_column(U0, 2), C[:, 2], atol=1e-8)
    assert P.cost(U0) <= 1e-20


def test_square_solve_interpolates():
    rng = np.random.default_rng(4)
    U = np.linalg.qr(rng.standard_normal((6, 2)))[0]
    vals = rng.standard_normal(2)
    P = MatCompProblem(6, 1, 2, EntrySet(np.array([1, 4]), np.array([0, 0]), vals))
    a = P.solve_column(U, 0)
    assert np.allclose(U[[1, 4]] @ a, vals, atol=1e-9)
    assert P.cost(U) <= 1e-18


def test_column_solve_matches_normal_equations():
    rng = np.random.default_rng(5)
    P, _, _, _ = full_problem(10, 6, 3, rng, frac=0.6)
    U = P.manifold.random_point(rng)
    for n in range(P.N):
        rows = P.rows[P.colptr[n]:P.colptr[n + 1]]
        vals = P.vals[P.colptr[n]:P.colptr[n + 1]]
        A = U[rows]
        ref = np.linalg.lstsq(A, vals, rcond=None)[0]
        assert np.allclose(P.solve_column(U, n), ref, atol=1e-8)


@pytest.mark.parametrize("dense", [True, False])
def test_cost_matches_brute_force(dense):
    rng = np.random.default_rng(6)
    P, _, _, _ = full_problem(9, 7, 2, rng, dense=dense, frac=0.5)
    U = P.manifold.random_point(rng)
    total = 0.0
    for n in range(P.N):
        rows = P.rows[P.colptr[n]:P.colptr[n + 1]]
        vals = P.vals[P.colptr[n]:P.colptr[n + 1]]
        a = np.linalg.lstsq(U[rows], vals, rcond=None)[0]
        total += np.sum((U[rows] @ a - vals) ** 2)
    assert np.isclose(P.cost(U), total / P.N, rtol=1e-8)
    assert P.cost(U, [3]) >= 0


@given(seeds)
def test_dense_and_sparse_paths_agree(seed):
    rng = np.random.default_rng(seed)
    P, _, _, _ = full_problem(7, 9, 2, rng, frac=0.4)
    Q = MatCompProblem(P.d, P.N, P.r, EntrySet(P.rows, np.repeat(np.arange(P.N), np.diff(P.colptr)), P.vals),
                       dense=not P.dense)
    U = P.manifold.random_point(rng)
    batch = rng.integers(0, P.N, size=5)
    assert np.isclose(P.cost(U, batch), Q.cost(U, batch), rtol=1e-10)
    assert np.allclose(P.grad(U, batch), Q.grad(U, batch), atol=1e-12)
    assert np.allclose(P.sample_grads(U, batch), Q.sample_grads(U, batch), atol=1e-12)


@pytest.mark.parametrize("dense", [True, False])
def test_mc_gradient_examples(dense):
    rng = np.random.default_rng(7)
    P, U0, _, _ = full_problem(8, 6, 2, rng, dense=dense, frac=0.7)
    assert np.allclose(P.grad(U0), 0.0, atol=1e-10)
    U = P.manifold.random_point(rng)
    singles = np.mean([P.grad(U, [n]) for n in range(P.N)], axis=0)
    assert np.allclose(singles, P.grad(U), atol=1e-14)
    for _ in range(5):
        xi = P.manifold.random_tangent(U, rng)
        exact = np.vdot(P.grad(U), xi)
        assert np.isclose(directional_fd(P, U, xi), exact, rtol=1e-5, atol=1e-9)


def test_synth_lowrank_examples():
    inst = synth_lowrank(6, 5, 2, os=30 / (2 * 9), cn=1.0, sigma=0.0, seed=0)
    assert inst.problem.n_observed == 30  # every entry
    assert len(inst.test) == 0
    assert np.allclose(inst.singular_values, 1.0)
    inst = synth_lowrank(30, 40, 3, os=3, cn=20, sigma=0.0, seed=1)
    s = np.linalg.svd(inst.truth, compute_uv=False)
    assert np.sum(s > 1e-8) == 3
    assert np.isclose(s[0] / s[2], 20.0)
    assert inst.problem.n_observed == round(3 * 3 * (30 + 40 - 3))
    assert inst.problem.cost(inst.left) <= 1e-20
    train = set(zip(inst.problem.rows, np.repeat(np.arange(40), np.diff(inst.problem.colptr))))
    assert not train & set(zip(inst.test.rows, inst.test.cols))


def test_synth_lowrank_infeasible():
    with pytest.raises(InfeasibleSampling):
        synth_lowrank(5, 5, 2, os=10, cn=1, sigma=0, seed=0)


def test_synth_lowrank_noise_scale():
    inst = synth_lowrank(40, 60, 2, os=4, cn=5, sigma=1e-3, seed=2)
    P = inst.problem
    cols = np.repeat(np.arange(P.N), np.diff(P.colptr))
    clean = np.einsum("kr,kr->k", inst.left[P.rows] * inst.singular_values, inst.right[cols])
    noise = P.vals - clean
    assert 0.5e-3 < np.std(noise) / inst.info["rms"] < 2e-3


# flat least squares


def test_least_squares_problem_closed_forms():
    rng = np.random.default_rng(8)
    P = LeastSquaresProblem(rng.standard_normal((20, 4)), rng.standard_normal(20), lam=0.1)
    assert np.allclose(P.grad(P.minimizer), 0.0, atol=1e-12)
    x = rng.standard_normal(4)
    assert np.allclose(P.grad(x), P.hessian @ (x - P.minimizer), atol=1e-12)

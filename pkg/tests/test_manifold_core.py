import numpy as np
import pytest

from rsqnvr.manifolds import SPD, Euclidean, GeometryFlavor, Grassmann

MANIFOLDS = [
    Euclidean(4),
    SPD(3),
    SPD(3, GeometryFlavor("second_order", "parallel")),
    Grassmann(7, 2),
    Grassmann(7, 2, GeometryFlavor("exponential", "parallel")),
]
IDS = ["euclid", "spd-exp", "spd-2nd", "gr-qr-proj", "gr-exp-par"]


@pytest.fixture(params=MANIFOLDS, ids=IDS)
def M(request):
    return request.param


def test_inner_zero_and_positive(M, rng):
    x = M.random_point(rng)
    xi = M.random_tangent(x, rng)
    assert M.inner(x, M.zero(x), xi) == 0.0
    assert M.inner(x, xi, xi) > 0
    assert np.isclose(M.norm(x, xi), 1.0)


def test_retract_zero_and_transport_zero(M, rng):
    x = M.random_point(rng)
    xi = M.random_tangent(x, rng)
    assert np.allclose(M.retract(x, M.zero(x)), x, atol=1e-12)
    assert np.allclose(M.transport(x, M.zero(x), xi), xi, atol=1e-12)
    assert M.kappa(x, M.zero(x)) == 1.0


def test_dist_to_self(M, rng):
    x = M.random_point(rng)
    assert M.dist(x, x) <= 1e-7


def test_transport_is_linear(M, rng):
    x = M.random_point(rng)
    eta = 0.3 * M.random_tangent(x, rng)
    a, b = M.random_tangent(x, rng), M.random_tangent(x, rng)
    lhs = M.transport(x, eta, 2.0 * a - 3.0 * b)
    rhs = 2.0 * M.transport(x, eta, a) - 3.0 * M.transport(x, eta, b)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_locking_flag():
    assert SPD(2).locking
    assert not SPD(2, GeometryFlavor("second_order", "parallel")).locking
    assert not Grassmann(4, 1).locking
    assert Grassmann(4, 1, GeometryFlavor("exponential", "parallel")).locking


def test_unknown_flavor_rejected():
    with pytest.raises(ValueError):
        SPD(2, GeometryFlavor("qr", "parallel"))
    with pytest.raises(ValueError):
        Grassmann(4, 2, GeometryFlavor("qr", "schild"))


def test_euclidean_identities(rng):
    M = Euclidean(3)
    x, xi = rng.standard_normal(3), rng.standard_normal(3)
    assert np.array_equal(M.retract(x, xi), x + xi)
    assert np.array_equal(M.transport(x, xi, xi), xi)
    assert M.kappa(x, xi) == 1.0
    assert np.isclose(M.dist(x, x + xi), np.linalg.norm(xi))

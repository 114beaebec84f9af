"""Symmetric positive-definite matrices with the affine-invariant metric."""
from functools import lru_cache

import numpy as np
import scipy.linalg

from ..errors import NotSPD, OutOfDomain, ShapeMismatch
from ..linalg import SPD_FLOOR, sym
from .base import GeometryFlavor, Manifold


def _eig(A):
    return np.linalg.eigh(sym(A))


def _fun(A, f):
    w, V = _eig(A)
    return sym((V * f(w)) @ V.T)


@lru_cache(maxsize=64)
def _factors_cached(buf: bytes, d: int):
    X = np.frombuffer(buf, dtype=float).reshape(d, d)
    w, V = _eig(X)
    if w[0] <= SPD_FLOOR:
        raise NotSPD(f"smallest eigenvalue {w[0]:.3e} <= {SPD_FLOOR}")
    r = np.sqrt(w)
    S = sym((V * r) @ V.T)
    Si = sym((V / r) @ V.T)
    Xi = sym((V / w) @ V.T)
    for M in (S, Si, Xi):
        M.setflags(write=False)
    return S, Si, Xi


def factors(X):
    """Return ``(X^{1/2}, X^{-1/2}, X^{-1})``, cached by value."""
    X = np.ascontiguousarray(X, dtype=float)
    return _factors_cached(X.tobytes(), X.shape[0])


def spd_inner(X, xi, eta) -> float:
    Xi = factors(X)[2]
    return float(np.sum((Xi @ xi) * (Xi @ eta).T))


def spd_exp(X, xi):
    S, Si, _ = factors(X)
    return sym(S @ _fun(Si @ xi @ Si, np.exp) @ S)


def spd_log(X, Y):
    S, Si, _ = factors(X)
    w, V = _eig(Si @ Y @ Si)
    if w[0] <= SPD_FLOOR:
        raise NotSPD("second argument of spd_log is not SPD")
    return sym(S @ ((V * np.log(w)) @ V.T) @ S)


def spd_retract_2nd(X, xi):
    Xi = factors(X)[2]
    return sym(X + xi + 0.5 * xi @ Xi @ xi)


def spd_inverse_retract_2nd(X, Z):
    """Inverse of ``X + xi + xi X^{-1} xi / 2`` on its principal branch."""
    S, Si, _ = factors(X)
    d = X.shape[0]
    w, V = _eig(2.0 * Si @ Z @ Si - np.eye(d))
    if w[0] <= 0:
        raise OutOfDomain("2 X^{-1/2} Z X^{-1/2} - I is not positive definite")
    A = (V * np.sqrt(w)) @ V.T - np.eye(d)
    return sym(S @ A @ S)


def _parallel_factor(X, eta):
    """Matrix E with parallel translation along the geodesic ``xi -> E xi E^T``."""
    S, Si, _ = factors(X)
    Y = _fun(Si @ eta @ Si, lambda w: np.exp(0.5 * w))
    return S @ Y @ Si


def spd_parallel(X, eta, xi):
    E = _parallel_factor(X, eta)
    return sym(E @ xi @ E.T)


def spd_dist(X, Y) -> float:
    w = scipy.linalg.eigh(sym(Y), sym(X), eigvals_only=True)
    if w[0] <= 0:
        raise NotSPD("dist arguments must be SPD")
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


class SPD(Manifold):
    """Manifold of d x d SPD matrices.

    Retractions: ``exponential`` or ``second_order`` (X + xi + xi X^-1 xi / 2).
    Transport: ``parallel`` translation along the geodesic joining the base
    point and the retracted point, which is isometric for either retraction.
    """

    name = "spd"
    valid_retractions = ("exponential", "second_order")
    valid_transports = ("parallel",)

    def __init__(self, d: int, flavor: GeometryFlavor | None = None):
        if d < 1:
            raise ValueError("d must be >= 1")
        super().__init__(flavor)
        self.d = d

    def inner(self, x, xi, eta):
        return spd_inner(x, xi, eta)

    def proj(self, x, G):
        return sym(np.asarray(G, dtype=float))

    def exp(self, x, xi):
        return spd_exp(x, xi)

    def log(self, x, y):
        return spd_log(x, y)

    def retract(self, x, xi):
        if self.flavor.retraction == "exponential":
            return spd_exp(x, xi)
        return spd_retract_2nd(x, xi)

    def inverse_retract(self, x, y):
        if self.flavor.retraction == "exponential":
            return spd_log(x, y)
        return spd_inverse_retract_2nd(x, y)

    def _geodesic_direction(self, x, eta, dest):
        if dest is None and self.flavor.retraction == "exponential":
            return eta
        if dest is None:
            dest = self.retract(x, eta)
        return spd_log(x, dest)

    def transport(self, x, eta, xi, dest=None):
        E = _parallel_factor(x, self._geodesic_direction(x, eta, dest))
        return sym(E @ xi @ E.T)

    def inverse_transport(self, x, eta, zeta, dest=None):
        # E(-v) = E(v)^{-1}
        Einv = _parallel_factor(x, -self._geodesic_direction(x, eta, dest))
        return sym(Einv @ zeta @ Einv.T)

    def retract_velocity(self, x, eta):
        if self.flavor.retraction == "exponential":
            return self.transport(x, eta, eta)
        return sym(eta + eta @ factors(x)[2] @ eta)

    def dist(self, x, y):
        return spd_dist(x, y)

    def check_point(self, x):
        x = np.asarray(x)
        if x.shape != (self.d, self.d):
            raise ShapeMismatch(f"expected ({self.d}, {self.d}), got {x.shape}")
        if not np.allclose(x, x.T, atol=1e-9 * max(1.0, np.abs(x).max())):
            raise NotSPD("matrix is not symmetric")
        if np.linalg.eigvalsh(sym(x))[0] <= SPD_FLOOR:
            raise NotSPD("matrix is not positive definite")

    def check_tangent(self, x, xi):
        xi = np.asarray(xi)
        if xi.shape != (self.d, self.d):
            raise ShapeMismatch(f"expected ({self.d}, {self.d}), got {xi.shape}")
        if not np.allclose(xi, xi.T, atol=1e-9 * max(1.0, np.abs(xi).max())):
            raise ShapeMismatch("SPD tangent vectors must be symmetric")

    def random_point(self, rng, cond: float = 10.0):
        """Random SPD matrix with eigenvalues log-uniform in ``[1, cond]``."""
        Q, _ = np.linalg.qr(rng.standard_normal((self.d, self.d)))
        w = np.exp(rng.uniform(0.0, np.log(cond), self.d))
        return sym((Q * w) @ Q.T)

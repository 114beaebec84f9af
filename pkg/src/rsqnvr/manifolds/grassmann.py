"""Grassmann manifold Gr(r, d) of r-dimensional subspaces of R^d.

A point is represented by a d x r matrix with orthonormal columns; tangent
vectors are horizontal lifts (``U.T @ xi = 0``) at that representative.
"""
import numpy as np
from scipy.linalg import solve_triangular

from ..errors import NearSingular, NotHorizontal, OutOfDomain, RankDeficient, ShapeMismatch
from .base import GeometryFlavor, Manifold

INV_TOL = 1e-10
HORIZONTAL_TOL = 1e-9
# transports are refused beyond this largest principal angle (radians)
MAX_TRANSPORT_ANGLE = 1.5


def _svd(A):
    W, s, Vt = np.linalg.svd(A, full_matrices=False)
    return W, s, Vt.T


def _check_horizontal(U, xi):
    if U.shape != np.shape(xi):
        raise ShapeMismatch(f"point {U.shape} and tangent {np.shape(xi)} differ in shape")
    if np.abs(U.T @ xi).max(initial=0.0) > HORIZONTAL_TOL * max(1.0, np.abs(xi).max(initial=0.0)):
        raise NotHorizontal("U.T @ xi is not zero")


def _qf(A):
    Q, R = np.linalg.qr(A)
    d = np.diag(R)
    if np.abs(d).min() <= 1e-12 * max(1.0, np.abs(d).max()):
        raise RankDeficient("retraction argument lost column rank")
    signs = np.where(d < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def gr_project(U, G):
    G = np.asarray(G, dtype=float)
    if G.shape != U.shape:
        raise ShapeMismatch(f"expected {U.shape}, got {G.shape}")
    return G - U @ (U.T @ G)


def gr_exp(U, xi):
    _check_horizontal(U, xi)
    W, s, V = _svd(xi)
    return (U @ V) * np.cos(s) @ V.T + W * np.sin(s) @ V.T


def gr_log(U, Y):
    UtY = U.T @ Y
    if np.linalg.svd(UtY, compute_uv=False)[-1] <= INV_TOL:
        raise OutOfDomain("U.T @ Y is singular: subspaces are not within pi/2")
    M = np.linalg.solve(UtY.T, (Y - U @ UtY).T).T
    W, s, V = _svd(M)
    return W * np.arctan(s) @ V.T


def _rotation_apply(U, eta, zeta, sign):
    """Apply the plane rotation carrying the geodesic along ``eta`` (sign=+1) or its inverse."""
    W, s, V = _svd(eta)
    UV = U @ V
    a = UV.T @ zeta
    b = W.T @ zeta
    c, sn = np.cos(s)[:, None] - 1.0, np.sin(s)[:, None]
    return zeta + UV @ (c * a - sign * sn * b) + W @ (sign * sn * a + c * b)


def gr_parallel(U, eta, zeta):
    """Parallel translation of ``zeta`` along the geodesic ``t -> gr_exp(U, t eta)`` to t = 1."""
    _check_horizontal(U, eta)
    _check_horizontal(U, zeta)
    return _rotation_apply(U, eta, zeta, 1.0)


def gr_parallel_inverse(U, eta, zeta):
    """Inverse of :func:`gr_parallel`; ``zeta`` is horizontal at ``gr_exp(U, eta)``."""
    return _rotation_apply(U, eta, zeta, -1.0)


def gr_retract_qr(U, xi):
    _check_horizontal(U, xi)
    # U + xi has Gram matrix I + xi^T xi (horizontality), so its Q factor is
    # (U + xi) C^{-T} with C the Cholesky factor; same Q as a positive-diagonal QR
    Y = U + xi
    try:
        C = np.linalg.cholesky(np.eye(U.shape[1]) + xi.T @ xi)
    except np.linalg.LinAlgError:
        return _qf(Y)[0]
    return solve_triangular(C, Y.T, lower=True, check_finite=False).T


def gr_inverse_retract_qr(U, Y):
    """Horizontal ``xi`` with ``span(qf(U + xi)) = span(Y)``."""
    UtY = U.T @ Y
    if np.linalg.svd(UtY, compute_uv=False)[-1] <= INV_TOL:
        raise OutOfDomain("U.T @ Y is singular")
    return np.linalg.solve(UtY.T, (Y - U @ UtY).T).T


def gr_transport_proj(U, eta, xi, dest=None):
    V = gr_retract_qr(U, eta) if dest is None else dest
    return xi - V @ (V.T @ xi)


def gr_inverse_transport_proj(U, eta, zeta, dest=None):
    """Solve ``gr_transport_proj(U, eta, xi) = zeta`` for ``xi`` horizontal at ``U``.

    Writing ``xi = zeta + V c`` and imposing ``U.T xi = 0`` gives
    ``c = -(U.T V)^{-1} U.T zeta``; the solution is unique iff ``U.T V`` is
    invertible.
    """
    V = gr_retract_qr(U, eta) if dest is None else dest
    UtV = U.T @ V
    smin = np.linalg.svd(UtV, compute_uv=False)[-1]
    if smin <= np.cos(MAX_TRANSPORT_ANGLE):
        raise NearSingular(f"principal angle {np.arccos(min(smin, 1.0)):.3f} rad too large to invert")
    return zeta - V @ np.linalg.solve(UtV, U.T @ zeta)


def gr_dist(U, Y) -> float:
    """Geodesic distance from the principal angles between the two subspaces."""
    c = np.linalg.svd(U.T @ Y, compute_uv=False)
    s = np.linalg.svd(Y - U @ (U.T @ Y), compute_uv=False)
    theta = np.arctan2(np.sort(s), np.sort(c)[::-1])
    return float(np.linalg.norm(theta))


class Grassmann(Manifold):
    """Gr(r, d) with retraction ``exponential`` or ``qr`` and transport ``parallel`` or ``projection``."""

    name = "grassmann"
    valid_retractions = ("qr", "exponential")
    valid_transports = ("projection", "parallel")

    def __init__(self, d: int, r: int, flavor: GeometryFlavor | None = None):
        if not 1 <= r <= d:
            raise ValueError("need 1 <= r <= d")
        super().__init__(flavor)
        self.d, self.r = d, r

    def inner(self, x, xi, eta):
        return float(np.vdot(xi, eta))

    def proj(self, x, G):
        return gr_project(x, G)

    def exp(self, x, xi):
        return gr_exp(x, xi)

    def log(self, x, y):
        return gr_log(x, y)

    def retract(self, x, xi):
        if self.flavor.retraction == "exponential":
            return gr_exp(x, xi)
        return gr_retract_qr(x, xi)

    def inverse_retract(self, x, y):
        if self.flavor.retraction == "exponential":
            return gr_log(x, y)
        return gr_inverse_retract_qr(x, y)

    @property
    def transport_uses_eta(self) -> bool:
        # the projection transport only needs the destination representative
        return self.flavor.transport != "projection"

    def _geodesic(self, x, eta, dest):
        """Velocity of the geodesic to the transport destination and its endpoint representative."""
        if self.flavor.retraction == "exponential" and dest is None:
            v = eta
        else:
            v = gr_log(x, self.retract(x, eta) if dest is None else dest)
        return v, gr_exp(x, v)

    def transport(self, x, eta, xi, dest=None):
        if self.flavor.transport == "projection":
            return gr_transport_proj(x, eta, xi, self.retract(x, eta) if dest is None else dest)
        v, end = self._geodesic(x, eta, dest)
        out = _rotation_apply(x, v, xi, 1.0)
        if dest is not None or self.flavor.retraction != "exponential":
            target = self.retract(x, eta) if dest is None else dest
            out = out @ (end.T @ target)
        return out

    def inverse_transport(self, x, eta, zeta, dest=None):
        if self.flavor.transport == "projection":
            return gr_inverse_transport_proj(x, eta, zeta, self.retract(x, eta) if dest is None else dest)
        v, end = self._geodesic(x, eta, dest)
        if dest is not None or self.flavor.retraction != "exponential":
            target = self.retract(x, eta) if dest is None else dest
            zeta = zeta @ (target.T @ end)
        return _rotation_apply(x, v, zeta, -1.0)

    def retract_velocity(self, x, eta):
        if self.flavor.retraction == "exponential":
            return _rotation_apply(x, eta, eta, 1.0)
        # horizontal part of d/dt qf(U + t eta) is (I - V V^T) eta R^{-1}
        V, R = _qf(x + eta)
        v = eta - V @ (V.T @ eta)
        return np.linalg.solve(R.T, v.T).T

    def dist(self, x, y):
        return gr_dist(x, y)

    def check_point(self, x):
        x = np.asarray(x)
        if x.shape != (self.d, self.r):
            raise ShapeMismatch(f"expected ({self.d}, {self.r}), got {x.shape}")
        if np.abs(x.T @ x - np.eye(self.r)).max() > 1e-9:
            raise ShapeMismatch("columns are not orthonormal")

    def check_tangent(self, x, xi):
        _check_horizontal(np.asarray(x), np.asarray(xi))

    def random_point(self, rng):
        return _qf(rng.standard_normal((self.d, self.r)))[0]

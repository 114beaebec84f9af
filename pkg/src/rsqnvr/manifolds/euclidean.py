import numpy as np

from ..errors import ShapeMismatch
from .base import GeometryFlavor, Manifold


class Euclidean(Manifold):
    """Flat space of arrays of a fixed shape: identity retraction and transport.

    Used to check that the Riemannian algorithms collapse to their textbook
    flat-space counterparts.
    """

    name = "euclidean"
    valid_retractions = ("exponential",)
    valid_transports = ("parallel",)

    def __init__(self, *shape: int, flavor: GeometryFlavor | None = None):
        super().__init__(flavor)
        self.shape = tuple(shape)

    def inner(self, x, xi, eta):
        return float(np.vdot(xi, eta))

    def proj(self, x, G):
        return np.asarray(G, dtype=float)

    def exp(self, x, xi):
        return x + xi

    def log(self, x, y):
        return y - x

    retract = exp
    inverse_retract = log

    def transport(self, x, eta, xi, dest=None):
        return xi

    def inverse_transport(self, x, eta, zeta, dest=None):
        return zeta

    def retract_velocity(self, x, eta):
        return eta

    def dist(self, x, y):
        return float(np.linalg.norm(np.asarray(y) - np.asarray(x)))

    def check_point(self, x):
        if np.shape(x) != self.shape:
            raise ShapeMismatch(f"expected shape {self.shape}, got {np.shape(x)}")

    def check_tangent(self, x, xi):
        self.check_point(xi)

    def random_point(self, rng):
        return rng.standard_normal(self.shape)

"""Geometry contract consumed by the optimizers.

Points and tangent vectors are plain numpy arrays; a tangent is always
interpreted relative to the base point passed alongside it. Transports
accept an optional ``dest`` representative: on quotient manifolds the same
subspace has many matrix representatives, and the optimizers pass the
representative they actually hold so the output is expressed there.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GeometryFlavor:
    retraction: str = "exponential"
    transport: str = "parallel"


class Manifold:
    """Abstract Riemannian manifold with retraction and vector transport."""

    name = "manifold"
    valid_retractions: tuple = ("exponential",)
    valid_transports: tuple = ("parallel",)

    def __init__(self, flavor: GeometryFlavor | None = None):
        flavor = flavor or GeometryFlavor(self.valid_retractions[0], self.valid_transports[0])
        if flavor.retraction not in self.valid_retractions:
            raise ValueError(f"{self.name}: unknown retraction {flavor.retraction!r}")
        if flavor.transport not in self.valid_transports:
            raise ValueError(f"{self.name}: unknown transport {flavor.transport!r}")
        self.flavor = flavor

    @property
    def locking(self) -> bool:
        """True when transport and retraction satisfy the locking condition with kappa = 1."""
        return self.flavor.retraction == "exponential" and self.flavor.transport == "parallel"

    # metric
    def inner(self, x, xi, eta) -> float:
        raise NotImplementedError

    def norm(self, x, xi) -> float:
        return float(np.sqrt(max(self.inner(x, xi, xi), 0.0)))

    def proj(self, x, G):
        """Project an ambient matrix onto the tangent space at ``x``."""
        raise NotImplementedError

    def zero(self, x):
        return np.zeros_like(x)

    # maps
    def exp(self, x, xi):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def retract(self, x, xi):
        raise NotImplementedError

    def inverse_retract(self, x, y):
        raise NotImplementedError

    def transport(self, x, eta, xi, dest=None):
        raise NotImplementedError

    def inverse_transport(self, x, eta, zeta, dest=None):
        raise NotImplementedError

    @property
    def transport_uses_eta(self) -> bool:
        """False when ``transport``/``inverse_transport`` given ``dest`` ignore ``eta``."""
        return True

    def retract_velocity(self, x, eta):
        """Velocity ``d/dt R_x(t eta)`` at ``t = 1``, a tangent at ``retract(x, eta)``."""
        raise NotImplementedError

    def kappa(self, x, eta) -> float:
        """Ratio ``||eta|| / ||D R_x(eta)[eta]||``; 1 for ``eta = 0``."""
        if self.flavor.retraction == "exponential" or not np.any(eta):
            return 1.0
        return self.norm(x, eta) / self.norm(self.retract(x, eta), self.retract_velocity(x, eta))

    def dist(self, x, y) -> float:
        raise NotImplementedError

    # membership and sampling
    def check_point(self, x) -> None:
        raise NotImplementedError

    def check_tangent(self, x, xi) -> None:
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator):
        raise NotImplementedError

    def random_tangent(self, x, rng: np.random.Generator):
        """A tangent at ``x`` with unit norm."""
        xi = self.proj(x, rng.standard_normal(np.shape(x)))
        return xi / self.norm(x, xi)

from .base import GeometryFlavor, Manifold
from .euclidean import Euclidean
from .grassmann import Grassmann
from .spd import SPD

__all__ = ["GeometryFlavor", "Manifold", "Euclidean", "Grassmann", "SPD"]

"""Riemannian stochastic quasi-Newton with variance reduction, its baselines,
and the SPD / Grassmann geometries and problems they are benchmarked on."""

__version__ = "0.1.0"

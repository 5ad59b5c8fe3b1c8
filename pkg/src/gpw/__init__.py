"""Generalized plane wave manifolds: curvature, geodesics, models and Killing fields."""

from .smoothfn import SmoothFunction, parse
from .geometry import ChartPoint, Hpsi, Mf, PXi, curvature, metric_at

__all__ = ["ChartPoint", "Hpsi", "Mf", "PXi", "SmoothFunction", "curvature", "metric_at", "parse"]
__version__ = "0.1.0"

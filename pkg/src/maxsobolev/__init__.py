"""Numerical experiments on maximal operators of Sobolev functions.

The package samples functions on uniform grids, averages them against
rescaled quadrature measures, and checks pointwise domination, trace
inequalities, truncation identities, Lebesgue-point behaviour and
p-capacity numerically.
"""
from .grid import AnalyticFunction, GridFunction, gradient, interpolate, lp_norm, sample
from .measures import (DiscreteMeasure, check_spherical_like, cube_boundary, dirac,
                       from_points, spherical_like_constant, unit_ball, unit_sphere)
from .operators import (ScaleLadder, average, hardy_littlewood, maximal,
                        riesz_potential, t_operator, truncate_between)
from .capacity import CapacityProblem, estimate_p_capacity
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "AnalyticFunction", "CapacityProblem", "DiscreteMeasure", "GridFunction",
    "Report", "ScaleLadder", "average", "check_spherical_like", "cube_boundary",
    "dirac", "estimate_p_capacity", "from_points", "gradient", "hardy_littlewood",
    "interpolate", "lp_norm", "maximal", "riesz_potential", "sample",
    "spherical_like_constant", "t_operator", "truncate_between", "unit_ball",
    "unit_sphere",
]

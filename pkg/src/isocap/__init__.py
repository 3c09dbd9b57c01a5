"""Capacity, torsion and isoperimetric-type inequalities for convex bodies.

Closed forms where they exist, quadrature and seeded Monte Carlo otherwise,
and upper bounds on Newtonian capacity in terms of parallel-set geometry.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .bounds import (BoundReport, BoundsConfig, bound_fraenkel_refined, bound_mean_curvature,
                     bound_p2_over_v, bound_parallel_volume, bound_perimeter_integral, bound_report, gamma_d,
                     jalpha_lower_ellipsoid, kalpha_bound, kalpha_perimeter_floor, sausage_bounds)
from .capacity import (CapacityEstimate, ball_capacity, cap_ellipsoid, cap_exact, cap_from_sausage,
                       cap_hitting_mc, isocapacitary_floor, reference_capacity)
from .errors import NumericalFailure, ShapeError
from .fraenkel import AsymmetryResult, asymmetry, asymmetry_continuity_check, isoperimetric_deficit
from .geometry import (Ball, Box, Ellipsoid, ParallelQuery, Polytope, SegmentFamily, load_shape, omega,
                       parallel_volume, perimeter, perimeter_mc, shape_from_dict, shape_to_dict, volume)
from .mc import MCConfig
from .quermass import QuermassVector, af_check, mean_curvature_integral, quermass
from .sausage import SausageConfig, SausageRun, check_prop3, fit_slope, run_sausage, simulate_paths
from .torsion import check_theorem3, check_theorem4, functional, torsion

import types as _types

__all__ = sorted(name for name, obj in globals().items()
                 if not name.startswith("_") and name != "annotations" and not isinstance(obj, _types.ModuleType))

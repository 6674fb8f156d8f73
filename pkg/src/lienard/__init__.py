"""Limit cycles of x'' + lambda f(x) x' + x = 0 for all lambda > 0."""

from .field import LienardField, build_field, eval_F, eval_df, eval_f, van_der_pol
from .hypothesis import HypothesisReport, analyze
from .averaging import AveragedProfile, arctan_bounds, fbar, find_rho, m1
from .geometry import ClosedCurve, SingularTrajectory, build_gamma0, circle, hausdorff, map_P, map_P_inv
from .dynamics import LimitCycle, Trajectory, find_limit_cycle, integrate, poincare_return
from .bounds import BoundRegion, gamma_bound, inward_flow_check, region_contains, region_diameter

__version__ = "0.1.0"

__all__ = [
    "LienardField", "build_field", "eval_F", "eval_df", "eval_f", "van_der_pol",
    "HypothesisReport", "analyze",
    "AveragedProfile", "arctan_bounds", "fbar", "find_rho", "m1",
    "ClosedCurve", "SingularTrajectory", "build_gamma0", "circle", "hausdorff", "map_P", "map_P_inv",
    "LimitCycle", "Trajectory", "find_limit_cycle", "integrate", "poincare_return",
    "BoundRegion", "gamma_bound", "inward_flow_check", "region_contains", "region_diameter",
]

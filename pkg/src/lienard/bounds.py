"""Amplitude bounds: the curves y = gamma(x; lambda) and y = -gamma(-x; lambda)
enclose a positively invariant region R_lambda containing the limit cycle.

With m = min f on [-x0, x0] (< 0), the boundary is

    gamma^2 = (x + x0)(x0 - x - m lam (x + x0)) / (1 + m lam)   lam <= -1/(2m)
    gamma^2 = (x + x0)(x0 - x + 8 m^2 lam^2 x0)                 lam >  -1/(2m)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .field import LienardField

MIN_GRID = 4001
MIN_TOL = 1e-10
CONTAIN_TOL = 1e-9
X0_SAFETY = 1.2


class BoundsError(RuntimeError):
    pass


def min_f(fld: LienardField, x0: float, n: int = MIN_GRID, tol: float = MIN_TOL) -> float:
    """min f on [-x0, x0]: grid scan, then bounded refinement around the best cells."""
    if not x0 > 0:
        raise ValueError("x0 must be positive")
    xs = np.linspace(-x0, x0, n)
    fv = np.asarray(fld.f(xs), dtype=float)
    best = float(fv.min())
    order = np.argsort(fv)[:3]
    for i in order:
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
        res = minimize_scalar(lambda v: float(fld.f(v)), bounds=(a, b), method="bounded",
                              options={"xatol": tol})
        best = min(best, float(res.fun))
    if not best < 0:
        raise BoundsError(f"min f on [-{x0}, {x0}] is {best:.6g} >= 0; f must change sign")
    return best


def branch_switch(m: float) -> float:
    """lambda at which gamma changes formula."""
    return -1.0 / (2.0 * m)


def _radicand(x, lam, x0, m):
    x = np.asarray(x, dtype=float)
    if lam <= branch_switch(m):
        return (x + x0) * (x0 - x - m * lam * (x + x0)) / (1.0 + m * lam)
    return (x + x0) * (x0 - x + 8.0 * m * m * lam * lam * x0)


def _radicand_dx(x, lam, x0, m):
    x = np.asarray(x, dtype=float)
    if lam <= branch_switch(m):
        return -2.0 * x - 2.0 * m * lam * x0 / (1.0 + m * lam)
    return 8.0 * m * m * lam * lam * x0 - 2.0 * x


def _check(lam, m):
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not m < 0:
        raise ValueError("m must be negative")


def gamma_bound(x, lam: float, x0: float, m: float):
    """Upper boundary gamma(x; lambda) for -x0 <= x <= x0."""
    _check(lam, m)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -x0 * (1 + 1e-15)) or np.any(xa > x0 * (1 + 1e-15)):
        raise ValueError(f"x outside [-{x0}, {x0}]")
    rad = _radicand(xa, lam, x0, m)
    floor = -1e-12 * x0 * x0
    if np.any(rad < floor):
        raise BoundsError("negative radicand in gamma")
    g = np.sqrt(np.maximum(rad, 0.0))
    return float(g) if g.ndim == 0 else g


def gamma_bound_dx(x, lam: float, x0: float, m: float):
    """d gamma / dx from the closed-form radicand derivative (open interval only)."""
    _check(lam, m)
    return _radicand_dx(x, lam, x0, m) / (2.0 * gamma_bound(x, lam, x0, m))


def region_diameter(lam: float, x0: float, m: float) -> float:
    """Distance between the corners (-x0, -gamma(x0)) and (x0, gamma(x0)).

    On the small-lambda branch this equals 2 x0 sqrt((1 - 3 m lam)/(1 + m lam)).
    """
    _check(lam, m)
    if lam <= branch_switch(m):
        return 2.0 * x0 * math.sqrt((1.0 - 3.0 * m * lam) / (1.0 + m * lam))
    return 2.0 * x0 * math.sqrt(1.0 + 16.0 * m * m * lam * lam)


def legacy_region_diameter(lam: float, x0: float, m: float) -> float:
    """Older small-lambda expression 2 x0 sqrt(1 + m^2 lam^2)/(1 + m lam).

    It differs from the corner distance except at lam -> 0 and lam = -1/(2m);
    kept for comparison only.
    """
    _check(lam, m)
    if lam <= branch_switch(m):
        return 2.0 * x0 * math.sqrt(1.0 + m * m * lam * lam) / (1.0 + m * lam)
    return 2.0 * x0 * math.sqrt(1.0 + 16.0 * m * m * lam * lam)


@dataclass(frozen=True)
class BoundRegion:
    x0: float
    m: float
    lam: float

    def __post_init__(self):
        _check(self.lam, self.m)
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")

    @property
    def branch(self) -> str:
        return "small-lambda" if self.lam <= branch_switch(self.m) else "large-lambda"

    def upper(self, x):
        return gamma_bound(x, self.lam, self.x0, self.m)

    def lower(self, x):
        return -gamma_bound(-np.asarray(x, dtype=float), self.lam, self.x0, self.m)

    @property
    def diameter(self) -> float:
        return region_diameter(self.lam, self.x0, self.m)

    def boundary(self, n: int = 400) -> np.ndarray:
        """Closed boundary polyline, clockwise: upper arc left to right, lower arc back."""
        xs = np.linspace(-self.x0, self.x0, n + 1)
        up = np.column_stack([xs, self.upper(xs)])
        lo = np.column_stack([xs[::-1], self.lower(xs[::-1])])
        return np.vstack([up, lo[1:-1]])


def build_region(fld: LienardField, lam: float, x0: float) -> BoundRegion:
    return BoundRegion(float(x0), min_f(fld, x0), float(lam))


def inward_flow_check(fld: LienardField, lam: float, x0: float, m: float, n: int = 512):
    """<grad h, X> along both boundary arcs at n interior abscissas.

    Returns ``(all_negative, worst)`` where ``worst`` is the largest (least
    negative) inner product seen.  Upper arc h = y - gamma(x); lower arc
    h = -gamma(-x) - y, both negative inside the region.
    """
    _check(lam, m)
    xs = np.linspace(-x0, x0, n + 2)[1:-1]
    g = gamma_bound(xs, lam, x0, m)
    # upper: -gamma' gamma - x - lam f(x) gamma, with gamma gamma' = R'/2
    upper = -0.5 * _radicand_dx(xs, lam, x0, m) - xs - lam * np.asarray(fld.f(xs)) * g
    # lower: at y = -gamma(-x), same expression evaluated at z = -x with f(-z)
    z = -xs
    gz = gamma_bound(z, lam, x0, m)
    lower = -0.5 * _radicand_dx(z, lam, x0, m) - z - lam * np.asarray(fld.f(xs)) * gz
    worst = float(max(upper.max(), lower.max()))
    return worst < 0, worst


def inward_flow_direct(fld: LienardField, lam: float, x0: float, m: float, xs, h: float = 1e-6):
    """Same inner products on the upper arc with a central-difference gamma'."""
    xs = np.asarray(xs, dtype=float)
    g = gamma_bound(xs, lam, x0, m)
    dg = (gamma_bound(xs + h, lam, x0, m) - gamma_bound(xs - h, lam, x0, m)) / (2 * h)
    X1, X2 = g, -xs - lam * np.asarray(fld.f(xs)) * g
    return -dg * X1 + X2


def region_contains(cycle, region: BoundRegion, tol: float = CONTAIN_TOL):
    """True iff every cycle sample lies strictly inside R_lambda.

    Returns ``(inside, first_violating_point_or_None)``.
    """
    if abs(cycle.lam - region.lam) > 1e-12 * max(1.0, region.lam):
        raise ValueError("cycle and region are for different lambda")
    pts = cycle.points.points if hasattr(cycle, "points") else np.asarray(cycle)
    return points_inside(pts, region, tol)


def points_inside(pts, region: BoundRegion, tol: float = CONTAIN_TOL):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    in_strip = (x > -region.x0 + tol) & (x < region.x0 - tol)
    ok = in_strip.copy()
    xc = np.clip(x, -region.x0, region.x0)
    ok &= y < region.upper(xc) - tol
    ok &= y > region.lower(xc) + tol
    if ok.all():
        return True, None
    i = int(np.flatnonzero(~ok)[0])
    return False, (float(x[i]), float(y[i]))


def choose_x0(report, rho: float, amplitudes=(), safety: float = X0_SAFETY) -> float:
    """Heuristic x0: safety times the largest observed |xi+-|, never below the
    floor max(rho, -x1, x2)."""
    floor = max(rho, -report.x1, report.x2)
    seen = [abs(v) for pair in amplitudes for v in pair if np.isfinite(v)]
    return safety * max([floor] + seen)

"""Closed curves in the phase plane: the singular trajectory, reference
circles, the Lienard-plane change of coordinates and Hausdorff distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import LienardField
from .hypothesis import HypothesisReport


@dataclass(frozen=True)
class ClosedCurve:
    """Ordered samples of a closed planar curve; the closing segment is implicit."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError("a closed curve needs at least 3 points of shape (n, 2)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("closed curve has non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    def __len__(self):
        return len(self.points)

    def segments(self):
        """(start, end) arrays of every polyline edge including the closing one."""
        a = self.points
        return a, np.roll(a, -1, axis=0)


@dataclass(frozen=True)
class SingularTrajectory:
    """Gamma_0 as four labelled pieces: A->A' (fast), A'->B (slow, on the graph
    of F), B->B' (fast), B'->A (slow)."""

    seg_AA: np.ndarray
    seg_AB: np.ndarray
    seg_BB: np.ndarray
    seg_BA: np.ndarray
    samples_per_segment: int

    @property
    def segments(self) -> dict:
        return {"AA'": self.seg_AA, "A'B": self.seg_AB, "BB'": self.seg_BB, "B'A": self.seg_BA}

    def corners(self) -> dict:
        return {"A": tuple(self.seg_AA[0]), "A'": tuple(self.seg_AA[-1]),
                "B": tuple(self.seg_BB[0]), "B'": tuple(self.seg_BB[-1])}

    def curve(self) -> ClosedCurve:
        # drop the duplicated junction points; closure is implicit
        pts = np.vstack([s[:-1] for s in (self.seg_AA, self.seg_AB, self.seg_BB, self.seg_BA)])
        return ClosedCurve(pts)


def build_gamma0(fld: LienardField, report: HypothesisReport, n_per_segment: int = 400) -> SingularTrajectory:
    """Sample Gamma_0 uniformly in x with ``n_per_segment`` intervals per piece.

    Traversal is clockwise: right along y = F(x_M), down the right branch of
    the graph, left along y = F(x_m), up the left branch.
    """
    report.require()
    n = int(n_per_segment)
    if n < 1:
        raise ValueError("n_per_segment must be >= 1")
    xM, xm, x1, x2 = report.x_M, report.x_m, report.x1, report.x2
    FM, Fm = float(fld.F(xM)), float(fld.F(xm))

    def horiz(a, b, level):
        xs = np.linspace(a, b, n + 1)
        return np.column_stack([xs, np.full_like(xs, level)])

    def graph(a, b, end_level_a, end_level_b):
        xs = np.linspace(a, b, n + 1)
        ys = np.asarray(fld.F(xs), dtype=float)
        # endpoints sit on the horizontals exactly, so the pieces join
        ys[0], ys[-1] = end_level_a, end_level_b
        return np.column_stack([xs, ys])

    return SingularTrajectory(
        seg_AA=horiz(xM, x2, FM),
        seg_AB=graph(x2, xm, FM, Fm),
        seg_BB=horiz(xm, x1, Fm),
        seg_BA=graph(x1, xM, Fm, FM),
        samples_per_segment=n,
    )


def map_P(fld: LienardField, lam: float, pts):
    """(x, y) -> (x, F(x) + y / lambda); accepts a point or an (n, 2) array."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    p = np.asarray(pts, dtype=float)
    x, y = p[..., 0], p[..., 1]
    return np.stack([x, np.asarray(fld.F(x)) + y / lam], axis=-1)


def map_P_inv(fld: LienardField, lam: float, pts):
    """(x, u) -> (x, lambda (u - F(x)))."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    p = np.asarray(pts, dtype=float)
    x, u = p[..., 0], p[..., 1]
    return np.stack([x, lam * (u - np.asarray(fld.F(x)))], axis=-1)


def circle(rho: float, n: int = 512) -> ClosedCurve:
    """Circle of radius rho sampled as (rho cos t, -rho sin t), t = 2 pi k / n."""
    if not rho > 0 or n < 3:
        raise ValueError("need rho > 0 and n >= 3")
    t = 2 * np.pi * np.arange(n) / n
    return ClosedCurve(np.column_stack([rho * np.cos(t), -rho * np.sin(t)]))


def _directed(a: np.ndarray, b: ClosedCurve, chunk: int = 512) -> float:
    """sup over points of a of the distance to the polyline of b."""
    p0, p1 = b.segments()
    d = p1 - p0
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd == 0.0, 1.0, dd)
    best = 0.0
    for i in range(0, len(a), chunk):
        q = a[i:i + chunk, None, :]
        t = np.clip(np.einsum("kij,ij->ki", q - p0, d) / dd, 0.0, 1.0)
        proj = p0 + t[..., None] * d
        dist2 = np.einsum("kij,kij->ki", q - proj, q - proj).min(axis=1)
        best = max(best, float(dist2.max()))
    return float(np.sqrt(best))


def hausdorff(a: ClosedCurve, b: ClosedCurve) -> float:
    """Hausdorff distance between two closed polylines (point-to-segment)."""
    return max(_directed(a.points, b), _directed(b.points, a))


def densify(c: ClosedCurve, spacing: float) -> np.ndarray:
    """Points along the closed polyline no further than ``spacing`` apart."""
    p0, p1 = c.segments()
    out = []
    for a, b in zip(p0, p1):
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing)))
        s = np.arange(k)[:, None] / k
        out.append(a + s * (b - a))
    return np.vstack(out)

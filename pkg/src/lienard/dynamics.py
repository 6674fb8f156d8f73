"""Flow of x' = y, y' = -x - lambda f(x) y, its first-return map on
{y = 0, x > 0} and the limit cycle as a fixed point of that map.

For lambda >= STIFF_LAMBDA the integration runs in the slow-fast chart
(x, u) = (x, F(x) + y/lambda) with slow time s = t/lambda, where the system
reads mu dx/ds = u - F(x), du/ds = -x with mu = 1/lambda^2.  The section
y = 0 is u = F(x) there, so both charts share the same crossing points.
Times are always reported in t.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .field import LienardField, build_field
from .geometry import ClosedCurve

STIFF_LAMBDA = 5.0
SMALL_LAMBDA = 1.0
RTOL = 1e-10
ATOL = 1e-12
BOX = 1e6
FIXED_POINT_TOL = 1e-10
STABILITY_REL_STEP = 1e-3
METHOD = "DOP853"


class DynamicsError(RuntimeError):
    pass


def vector_field(fld: LienardField, lam: float, state):
    x, y = state
    return y, -x - lam * float(fld.f(x)) * y


def slow_fast_field(fld: LienardField, mu: float, state):
    if not mu > 0:
        raise ValueError("mu must be positive")
    x, u = state
    return (u - float(fld.F(x))) / mu, -x


def divergence(fld: LienardField, lam: float, x):
    return -lam * np.asarray(fld.f(x))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    coordinate_chart: str = "lienard-plane"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory has non-finite states")

    @property
    def final(self):
        return self.states[-1]


class _Chart:
    """One coordinate system for integrating the flow at fixed lambda."""

    def __init__(self, fld: LienardField, lam: float, slow_fast: bool):
        self.fld, self.lam, self.slow_fast = fld, lam, slow_fast
        self.name = "slow-fast-plane" if slow_fast else "lienard-plane"
        f, F = fld.f_impl, fld.F_impl
        if slow_fast:
            lam2 = lam * lam

            def rhs(s, z):
                x, u = z
                return [lam2 * (u - float(F(x))), -x]

            def section(s, z):
                return z[1] - float(F(z[0]))
        else:
            def rhs(t, z):
                x, y = z
                return [y, -x - lam * float(f(x)) * y]

            def section(t, z):
                return z[1]
        self.rhs, self.section = rhs, section
        self.time_scale = lam if slow_fast else 1.0   # t = time_scale * chart time

    def to_chart(self, xy):
        xy = np.asarray(xy, dtype=float)
        if not self.slow_fast:
            return xy
        x, y = xy[..., 0], xy[..., 1]
        return np.stack([x, np.asarray(self.fld.F(x)) + y / self.lam], axis=-1)

    def to_lienard(self, z):
        z = np.asarray(z, dtype=float)
        if not self.slow_fast:
            return z
        x, u = z[..., 0], z[..., 1]
        return np.stack([x, self.lam * (u - np.asarray(self.fld.F(x)))], axis=-1)


def _chart(fld: LienardField, lam: float, slow_fast: Optional[bool] = None) -> _Chart:
    if slow_fast is None:
        slow_fast = lam >= STIFF_LAMBDA
    if slow_fast and not fld.has_closed_F:
        # F by quadrature on every right-hand-side call is far too slow
        slow_fast = False
    if slow_fast and not lam > 0:
        raise ValueError("slow-fast chart needs lambda > 0")
    return _Chart(fld, lam, slow_fast)


def _escape_event(box: float):
    def ev(t, z):
        return box - max(abs(z[0]), abs(z[1]))
    ev.terminal = True
    return ev


def integrate(fld, lam: float, state0, t_end: float, tol: float = RTOL,
              slow_fast: Optional[bool] = None, box: float = BOX) -> Trajectory:
    """Integrate from ``state0`` = (x, y) over [0, t_end] (t units).

    Returned states are in the (x, y) plane; ``coordinate_chart`` records the
    chart the integration actually ran in.
    """
    fld = build_field(fld)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    ch = _chart(fld, lam, slow_fast)
    z0 = ch.to_chart(np.asarray(state0, dtype=float))
    res = solve_ivp(ch.rhs, (0.0, t_end / ch.time_scale), z0, method=METHOD,
                    rtol=tol, atol=tol * 1e-2, events=_escape_event(box))
    if res.status == -1:
        raise DynamicsError(f"integration failed: {res.message}")
    if res.status == 1:
        raise DynamicsError("orbit escaped the bounding box")
    states = ch.to_lienard(res.y.T)
    if not np.all(np.isfinite(states)):
        raise DynamicsError("non-finite state")
    return Trajectory(res.t * ch.time_scale, states, ch.name)


@dataclass
class _Return:
    r_in: float
    r_out: float
    xi_minus: float
    time: float
    sols: list
    chart: _Chart


def _half_turn(ch: _Chart, z0, direction: int, t_max: float, rtol: float, atol: float, box: float):
    ev = lambda t, z: ch.section(t, z)
    ev.terminal, ev.direction = True, direction
    res = solve_ivp(ch.rhs, (0.0, t_max / ch.time_scale), z0, method=METHOD, rtol=rtol,
                    atol=atol, events=[ev, _escape_event(box)], dense_output=True)
    if res.status == -1:
        raise DynamicsError(f"integration failed: {res.message}")
    if res.t_events[1].size:
        raise DynamicsError("orbit escaped the bounding box")
    if not res.t_events[0].size:
        raise DynamicsError(f"no section crossing within t={t_max:g}")
    return res.t_events[0][0], res.y_events[0][0], res.sol


def _first_return(fld: LienardField, lam: float, r: float, rtol: float = RTOL, atol: float = ATOL,
                  t_max: Optional[float] = None, slow_fast: Optional[bool] = None,
                  box: float = BOX) -> _Return:
    if not r > 0:
        raise ValueError("r must be positive")
    ch = _chart(fld, lam, slow_fast)
    if t_max is None:
        t_max = 100.0 * (1.0 + lam)
    z0 = ch.to_chart(np.array([r, 0.0]))
    if ch.slow_fast:
        z0[1] = float(fld.F(r))  # exactly on the section
    # leftmost point: y crosses 0 upward (x < 0); then back to y = 0 downward (x > 0)
    t1, z1, s1 = _half_turn(ch, z0, +1, t_max, rtol, atol, box)
    t2, z2, s2 = _half_turn(ch, z1, -1, t_max, rtol, atol, box)
    return _Return(r, float(z2[0]), float(z1[0]), (t1 + t2) * ch.time_scale, [s1, s2], ch)


def poincare_return(fld, lam: float, r: float, tol: float = RTOL, **kw) -> float:
    """First return abscissa on {y = 0, x > 0} of the orbit through (r, 0)."""
    fld = build_field(fld)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return _first_return(fld, lam, r, rtol=tol, atol=tol * 1e-2, **kw).r_out


def displacement(fld, lam: float, r: float, tol: float = RTOL, **kw) -> float:
    return poincare_return(fld, lam, r, tol, **kw) - r


@dataclass
class LimitCycle:
    lam: float
    points: ClosedCurve
    period: float
    xi_minus: float
    xi_plus: float
    stability: str
    section_radius: float
    chart: str = "lienard-plane"
    chart_points: Optional[np.ndarray] = None   # (x, u) samples when integrated slow-fast
    times: Optional[np.ndarray] = None
    iterations: int = 0
    delta_below: float = float("nan")
    delta_above: float = float("nan")

    @property
    def stable(self) -> bool:
        return self.stability == "stable"

    def summary(self) -> dict:
        return {"lambda": self.lam, "xi_minus": self.xi_minus, "xi_plus": self.xi_plus,
                "period": self.period, "section_radius": self.section_radius,
                "stability": self.stability, "chart": self.chart,
                "iterations": self.iterations}


def _sample(ret: _Return, per_step: int = 4, min_points: int = 2000):
    """Dense samples over one revolution, denser where the solver stepped."""
    zs, ts = [], []
    offset = 0.0
    for sol in ret.sols:
        knots = np.asarray(sol.ts)
        frac = np.arange(per_step) / per_step
        t = (knots[:-1, None] + np.diff(knots)[:, None] * frac).ravel()
        t = np.union1d(t, np.linspace(knots[0], knots[-1], min_points // len(ret.sols)))
        zs.append(sol(t).T)
        ts.append(t + offset)
        offset += knots[-1]
    z = np.vstack(zs)
    t = np.concatenate(ts)
    keep = np.concatenate([[True], np.diff(t) > 0])
    return t[keep] * ret.chart.time_scale, z[keep]


def _solve_fixed_point(delta, seed: float, tol: float, maxit: int = 60):
    """Zero of the displacement by secant steps, bracket-safeguarded (Illinois).

    Returns (r, iterations, bracket).
    """
    it = 0
    a = seed
    da = delta(a)
    it += 1
    if da == 0.0:
        return a, it, (a, a)
    direction = 1.0 if da > 0 else -1.0   # below a stable cycle the orbit moves outward
    h = 0.05 * a
    b = a + direction * h
    if b <= 0:
        b = 0.5 * a
    db = delta(b)
    it += 1
    # march outward using secant predictions until the sign flips
    while np.sign(db) == np.sign(da) and db != 0.0:
        if it > maxit:
            raise DynamicsError("could not bracket the fixed point of the return map")
        step = abs(b - a)
        s = b - db * (b - a) / (db - da) if db != da else b + direction * 2 * step
        lo_step, hi_step = 0.5 * step, 4.0 * step
        move = min(max(direction * (s - b), lo_step), hi_step)
        s = b + direction * move
        if s <= 0:
            s = 0.5 * b
        a, da = b, db
        b, db = s, delta(s)
        it += 1
    if db == 0.0:
        return b, it, (b, b)
    # now da, db have opposite signs
    side = 0
    while abs(b - a) > tol * max(1.0, abs(b)):
        if it > maxit:
            raise DynamicsError("secant iteration on the displacement did not converge")
        c = b - db * (b - a) / (db - da)
        dc = delta(c)
        it += 1
        if dc == 0.0:
            return c, it, (c, c)
        if np.sign(dc) == np.sign(db):
            b, db = c, dc
            if side == -1:
                da *= 0.5
            side = -1
        else:
            a, da = b, db
            b, db = c, dc
            side = +1
        if abs(db) < 1e-15 * max(1.0, abs(b)):
            break
    return b, it, (min(a, b), max(a, b))


def _default_seed(fld: LienardField, lam: float, report=None, rho=None) -> float:
    from .hypothesis import analyze
    if report is None:
        report = analyze(fld)
    report.require()
    if lam < SMALL_LAMBDA:
        if rho is None:
            from .averaging import find_rho
            rho = find_rho(fld, report).rho
        return float(rho)
    return float(report.x2)


def find_limit_cycle(fld, lam: float, hint: Optional[float] = None, *, report=None, rho=None,
                     tol: float = RTOL, r_tol: float = FIXED_POINT_TOL,
                     slow_fast: Optional[bool] = None, n_samples: int = 2000,
                     t_max: Optional[float] = None) -> LimitCycle:
    """Limit cycle at ``lam`` as the fixed point of the first-return map."""
    fld = build_field(fld)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    seed = float(hint) if hint is not None else _default_seed(fld, lam, report, rho)
    kw = dict(rtol=tol, atol=tol * 1e-2, slow_fast=slow_fast, t_max=t_max)
    delta = lambda r: _first_return(fld, lam, r, **kw).r_out - r
    r_fix, iters, _ = _solve_fixed_point(delta, seed, r_tol)

    ret = _first_return(fld, lam, r_fix, **kw)
    step = STABILITY_REL_STEP * r_fix
    d_lo, d_hi = delta(r_fix - step), delta(r_fix + step)
    if d_lo > 0 > d_hi:
        stability = "stable"
    elif d_lo < 0 < d_hi:
        stability = "unstable"
    else:
        stability = "inconsistent"

    t, z = _sample(ret, min_points=n_samples)
    xy = ret.chart.to_lienard(z)
    return LimitCycle(
        lam=float(lam),
        points=ClosedCurve(xy[:-1]),
        period=float(ret.time),
        xi_minus=float(min(ret.xi_minus, xy[:, 0].min())),
        xi_plus=float(max(r_fix, xy[:, 0].max())),
        stability=stability,
        section_radius=float(r_fix),
        chart=ret.chart.name,
        chart_points=z[:-1] if ret.chart.slow_fast else None,
        times=t[:-1],
        iterations=iters,
        delta_below=float(d_lo),
        delta_above=float(d_hi),
    )


def lienard_to_slow_fast(fld: LienardField, cycle: LimitCycle) -> np.ndarray:
    """P_lambda applied to the cycle samples, reusing chart samples when present."""
    if cycle.chart_points is not None:
        return cycle.chart_points
    x, y = cycle.points.x, cycle.points.y
    return np.column_stack([x, np.asarray(fld.F(x)) + y / cycle.lam])


@dataclass
class SweepRow:
    lam: float
    xi_minus: float = float("nan")
    xi_plus: float = float("nan")
    period: float = float("nan")
    stable: bool = False
    error: Optional[str] = None
    cycle: Optional[LimitCycle] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None


def _monotone_decreasing(values) -> str:
    v = [x for x in values if np.isfinite(x)]
    if len(v) < 2:
        return "insufficient-data"
    return "decreasing" if all(b < a for a, b in zip(v, v[1:])) else "not-decreasing"


def amplitude_trends(rows, rho: float, x1: float, x2: float,
                     small_max: float = 0.5, large_min: float = STIFF_LAMBDA) -> dict:
    """Monotone approach of xi-/xi+ to -rho/rho as lambda decreases and to
    x1/x2 as lambda increases."""
    good = sorted((r for r in rows if r.ok), key=lambda r: r.lam)
    small = [r for r in good if r.lam <= small_max][::-1]      # lambda decreasing
    large = [r for r in good if r.lam >= large_min]            # lambda increasing
    err_small = [max(abs(r.xi_plus - rho), abs(r.xi_minus + rho)) for r in small]
    err_large = [max(abs(r.xi_plus - x2), abs(r.xi_minus - x1)) for r in large]
    return {"small_lambda": _monotone_decreasing(err_small),
            "large_lambda": _monotone_decreasing(err_large)}


def amplitude_sweep(fld, lambdas, *, report=None, rho=None, keep_cycles: bool = False, **kw):
    """find_limit_cycle for each lambda; failures are recorded per row."""
    fld = build_field(fld)
    lambdas = list(lambdas)
    if not lambdas:
        return []
    if report is None:
        from .hypothesis import analyze
        report = analyze(fld)
    if rho is None and any(l < SMALL_LAMBDA for l in lambdas):
        from .averaging import find_rho
        rho = find_rho(fld, report).rho
    rows = []
    for lam in lambdas:
        try:
            c = find_limit_cycle(fld, lam, report=report, rho=rho, **kw)
            rows.append(SweepRow(lam, c.xi_minus, c.xi_plus, c.period, c.stable,
                                 cycle=c if keep_cycles else None))
        except (DynamicsError, ValueError, ArithmeticError) as exc:
            rows.append(SweepRow(lam, error=str(exc)))
    return rows


def bendixson_check(cycle: LimitCycle, report, tol: float = 1e-9) -> bool:
    """A cycle cannot sit inside the strip x_M < x < x_m where div X > 0."""
    return cycle.xi_minus <= report.x_M + tol or cycle.xi_plus >= report.x_m - tol


__all__ = [
    "DynamicsError", "Trajectory", "LimitCycle", "SweepRow", "vector_field", "slow_fast_field",
    "divergence", "integrate", "poincare_return", "displacement", "find_limit_cycle",
    "amplitude_sweep", "amplitude_trends", "bendixson_check", "lienard_to_slow_fast",
    "STIFF_LAMBDA",
]



"""Checks of the standing hypotheses and the landmark abscissas.

The landmarks, in increasing order, are

    x1 < x1* < x_M < 0 < x_m < x2* < x2

with x_M, x_m the zeros of f, x1*, x2* the nonzero zeros of F, and x1, x2
the points where the horizontals through the extrema of F meet its graph
again.  All searches run on a finite interval [-L, L].
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .field import LienardField, build_field

DEFAULT_L = 50.0
ROOT_TOL = 1e-12
GRID = 4096
ROOT_GRID = 200001
SYM_RTOL = 1e-9
GROWTH = 1.5
DRAGILEV_K_FACTOR = 1.25


class HypothesisError(RuntimeError):
    pass


def _refine(g, a: float, b: float, tol: float = ROOT_TOL) -> float:
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    return brentq(g, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass
class Witness:
    holds: bool
    detail: str = ""
    x: Optional[float] = None


@dataclass
class HypothesisReport:
    a1_holds: bool = False
    a2_holds: bool = False
    x_M: Optional[float] = None
    x_m: Optional[float] = None
    df_at_xM: Optional[float] = None
    df_at_xm: Optional[float] = None
    x1_star: Optional[float] = None
    x2_star: Optional[float] = None
    x1: Optional[float] = None
    x2: Optional[float] = None
    x_star: Optional[float] = None
    r_star: Optional[float] = None
    F_xM: Optional[float] = None
    F_xm: Optional[float] = None
    f_roots: list = field(default_factory=list)
    uniqueness: dict = field(default_factory=dict)
    uniqueness_status: str = "not-checked"
    dragilev: dict = field(default_factory=dict)
    dragilev_witnesses: dict = field(default_factory=dict)
    p_properties: dict = field(default_factory=dict)
    search_interval: tuple = (-DEFAULT_L, DEFAULT_L)
    messages: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.a1_holds and self.a2_holds

    @property
    def d_any(self) -> bool:
        return any(w.holds for w in self.uniqueness.values())

    def require(self):
        if not self.passed:
            raise HypothesisError("; ".join(self.messages) or "A1/A2 not verified")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["search_interval"] = list(self.search_interval)
        d["D_any"] = self.d_any
        return d


# -- A1 ------------------------------------------------------------------------

def check_a1(fld: LienardField, L: float = DEFAULT_L, n: int = ROOT_GRID, tol: float = ROOT_TOL):
    """Locate the zeros of f on [-L, L].

    Returns ``(holds, x_M, x_m, df(x_M), df(x_m), roots)``; when A1 fails the
    middle entries are None and ``roots`` lists whatever zeros were found.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    xs = np.linspace(-L, L, n)
    fv = np.asarray(fld.f(xs), dtype=float)
    roots = []
    exact = np.flatnonzero(fv == 0.0)
    roots.extend(float(xs[i]) for i in exact)
    s = np.sign(fv)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    g = lambda v: float(fld.f(v))
    roots.extend(_refine(g, float(xs[i]), float(xs[i + 1]), tol) for i in idx)
    roots.sort()
    if len(roots) != 2:
        return False, None, None, None, None, roots
    x_M, x_m = roots
    if not (x_M < 0 < x_m):
        return False, None, None, None, None, roots
    dM, dm = float(fld.df(x_M)), float(fld.df(x_m))
    ok = dM < 0 < dm
    return ok, x_M, x_m, dM, dm, roots


# -- zeros of F and the level-set returns --------------------------------------

def _outward_bracket(g, start: float, stop: float, first_step: float):
    """Expand geometrically from ``start`` toward ``stop`` until g changes sign."""
    direction = math.copysign(1.0, stop - start)
    g0 = g(start)
    prev = start
    step = first_step
    while True:
        cur = start + direction * step
        if direction * (cur - stop) >= 0:
            cur = stop
        gc = g(cur)
        if np.sign(gc) != np.sign(g0) or gc == 0.0:
            return (prev, cur) if prev < cur else (cur, prev)
        if cur == stop:
            return None
        prev = cur
        step *= 2.0


def find_F_zeros(fld: LienardField, report: HypothesisReport, tol: float = ROOT_TOL):
    """Nonzero zeros x1* < 0 < x2* of F, or None entries when absent."""
    lo, hi = report.search_interval
    F = lambda v: float(fld.F(v))
    step = 1e-3 * max(1.0, report.x_m - report.x_M)
    x2s = x1s = None
    br = _outward_bracket(F, report.x_m, hi, step)
    if br is not None:
        x2s = _refine(F, *br, tol)
    br = _outward_bracket(F, report.x_M, lo, step)
    if br is not None:
        x1s = _refine(F, *br, tol)
    return x1s, x2s


def check_a2(fld: LienardField, report: HypothesisReport, tol: float = ROOT_TOL):
    """Returns ``(holds, x1, x2)``.

    x2 solves F(x) = F(x_M) right of x_m, x1 solves F(x) = F(x_m) left of x_M.
    """
    lo, hi = report.search_interval
    FM, Fm = float(fld.F(report.x_M)), float(fld.F(report.x_m))
    step = 1e-3 * max(1.0, report.x_m - report.x_M)
    gr = lambda v: float(fld.F(v)) - FM
    gl = lambda v: float(fld.F(v)) - Fm
    x2 = x1 = None
    br = _outward_bracket(gr, report.x_m, hi, step)
    if br is not None:
        x2 = _refine(gr, *br, tol)
    br = _outward_bracket(gl, report.x_M, lo, step)
    if br is not None:
        x1 = _refine(gl, *br, tol)
    return (x1 is not None and x2 is not None), x1, x2


def landmarks(fld: LienardField, report: HypothesisReport):
    """x* and r*; raises HypothesisError on a nonpositive r* denominator."""
    x1, x2 = report.x1, report.x2
    FM, Fm = float(fld.F(report.x_M)), float(fld.F(report.x_m))
    x_star = min(-report.x1_star, report.x2_star)
    den = x1 * Fm + x2 * FM
    if not den > 0:
        raise HypothesisError(f"r* denominator x1 F(x_m) + x2 F(x_M) = {den:.6g} is not positive")
    r_star = (x1**2 + x2**2) * (FM - Fm) / den
    if not r_star > x_star:
        raise HypothesisError(f"r* = {r_star:.12g} does not exceed x* = {x_star:.12g}")
    return x_star, r_star


# -- sufficient uniqueness conditions ------------------------------------------

def _F_unbounded(fld: LienardField, L: float, growth: float = GROWTH) -> Witness:
    """Heuristic F(+-inf) = +-inf: F(+-2L) must outgrow F(+-L) by ``growth``."""
    Fp, Fp2 = float(fld.F(L)), float(fld.F(2 * L))
    Fn, Fn2 = float(fld.F(-L)), float(fld.F(-2 * L))
    ok_p = Fp > 0 and Fp2 >= growth * Fp
    ok_n = Fn < 0 and Fn2 <= growth * Fn
    if ok_p and ok_n:
        return Witness(True)
    bad = L if not ok_p else -L
    return Witness(False, f"F does not grow by factor {growth} between {bad} and {2 * bad}", bad)


def _first_violation(xs, vals, tol):
    bad = np.flatnonzero(vals < -tol)
    return None if bad.size == 0 else float(xs[bad[0]])


def check_uniqueness(fld: LienardField, report: HypothesisReport, n: int = GRID,
                     rtol: float = SYM_RTOL, growth: float = GROWTH) -> dict:
    lo, hi = report.search_interval
    L = hi
    unb = _F_unbounded(fld, L, growth)
    out = {}

    sym_star = abs(report.x1_star + report.x2_star) < rtol * report.x2_star
    if unb.holds and sym_star:
        out["D1"] = Witness(True)
    else:
        out["D1"] = Witness(False, unb.detail if not unb.holds else
                            f"x1* + x2* = {report.x1_star + report.x2_star:.3g}", unb.x)

    sym = abs(report.x_M + report.x_m) < rtol * report.x_m
    if unb.holds and sym:
        out["D2"] = Witness(True)
    else:
        out["D2"] = Witness(False, unb.detail if not unb.holds else
                            f"x_M + x_m = {report.x_M + report.x_m:.3g}", unb.x)

    xl = np.linspace(lo, 0.0, n)[:-1]
    xr = np.linspace(0.0, hi, n)[1:]
    dl = -np.asarray(fld.df(xl), dtype=float)   # f nonincreasing: -f' >= 0
    dr = np.asarray(fld.df(xr), dtype=float)
    wl = _first_violation(xl, dl, 1e-12)
    wr = _first_violation(xr, dr, 1e-12)
    if wl is None and wr is None:
        out["D3"] = Witness(True)
    else:
        w = wl if wl is not None else wr
        out["D3"] = Witness(False, f"f is not monotone on the required side near x={w:.6g}", w)

    # d/dx F(x)/x has the sign of x f(x) - F(x)
    def slope_num(x):
        x = np.asarray(x, dtype=float)
        fx, Fx = np.asarray(fld.f(x), dtype=float), np.asarray(fld.F(x), dtype=float)
        return x * fx - Fx, np.abs(x * fx) + np.abs(Fx)

    sl, scl = slope_num(xl)
    xr4 = np.linspace(report.x2_star, hi, n)
    sr, scr = slope_num(xr4)
    wl = _first_violation(xl, -sl / (1.0 + scl), 1e-12)
    wr = _first_violation(xr4, sr / (1.0 + scr), 1e-12)
    order = report.x2_star <= -report.x1_star * (1 + rtol)
    if wl is None and wr is None and order:
        out["D4"] = Witness(True)
    elif not order:
        out["D4"] = Witness(False, "x2* > -x1*", report.x2_star)
    else:
        w = wl if wl is not None else wr
        out["D4"] = Witness(False, f"F(x)/x is not monotone on the required side near x={w:.6g}", w)
    return out


def check_dragilev(fld: LienardField, report: HypothesisReport, n: int = GRID,
                   k_factor: float = DRAGILEV_K_FACTOR):
    """Dragilev's existence conditions B1-B4 with the witnesses used."""
    lo, hi = report.search_interval
    flags = {"B1": Witness(True, "F and g(x)=x are locally Lipschitz"),
             "B2": Witness(True, "G(x) = x^2/2")}
    wit = {"a1": report.x_M, "a2": report.x_m}

    xl = np.linspace(report.x_M, 0.0, n)[:-1]
    xr = np.linspace(0.0, report.x_m, n)[1:]
    Fl = np.asarray(fld.F(xl), dtype=float)
    Fr = np.asarray(fld.F(xr), dtype=float)
    if np.all(Fl > 0) and np.all(Fr < 0):
        flags["B3"] = Witness(True)
    else:
        bad = xl[np.argmin(Fl)] if not np.all(Fl > 0) else xr[np.argmax(Fr)]
        flags["B3"] = Witness(False, "F has the wrong sign near 0", float(bad))

    if report.x1 is None or report.x2 is None:
        flags["B4"] = Witness(False, "level-set returns x1/x2 not found (A2 fails)")
        return flags, wit
    k = k_factor * max(-report.x1, report.x2)
    b1, b2 = float(fld.F(report.x_m)), float(fld.F(report.x_M))
    wit.update(k=k, b1=b1, b2=b2)
    if not (k < hi and -k > lo):
        flags["B4"] = Witness(False, f"k={k:.6g} leaves the search interval")
        return flags, wit
    xl = np.linspace(lo, -k, n, endpoint=False)
    xr = np.linspace(hi, k, n, endpoint=False)
    Fl = np.asarray(fld.F(xl), dtype=float)
    Fr = np.asarray(fld.F(xr), dtype=float)
    if b1 < b2 and np.all(Fl <= b1) and np.all(Fr >= b2):
        flags["B4"] = Witness(True)
    else:
        bad = xl[np.argmax(Fl)] if not np.all(Fl <= b1) else xr[np.argmin(Fr)]
        flags["B4"] = Witness(False, "F crosses the b1/b2 levels outside [-k, k]", float(bad))
    return flags, wit


def check_p_properties(fld: LienardField, report: HypothesisReport, n: int = GRID) -> dict:
    """Grid check of the four lower bounds on x F(x); margins are min(xF - bound)."""
    lo, hi = report.search_interval
    x1, x2 = report.x1, report.x2
    FM, Fm = float(fld.F(report.x_M)), float(fld.F(report.x_m))
    pieces = {
        "p1": (lo, x1, x1 * Fm),
        "p2": (x1, 0.0, x1 * FM),
        "p3": (0.0, x2, x2 * Fm),
        "p4": (x2, hi, x2 * FM),
    }
    out = {}
    for name, (a, b, bound) in pieces.items():
        xs = np.linspace(a, b, n + 2)[1:-1]
        margin = xs * np.asarray(fld.F(xs), dtype=float) - bound
        i = int(np.argmin(margin))
        out[name] = {"holds": bool(margin[i] > 0), "margin": float(margin[i]), "at": float(xs[i])}
    return out


# -- driver --------------------------------------------------------------------

def analyze(fld, L: float = DEFAULT_L, tol: float = ROOT_TOL, grid: int = GRID) -> HypothesisReport:
    """Run every check and collect the landmarks into one report."""
    fld = build_field(fld)
    rep = HypothesisReport(search_interval=(-float(L), float(L)))
    ok, x_M, x_m, dM, dm, roots = check_a1(fld, L, tol=tol)
    rep.f_roots = [float(r) for r in roots]
    if x_M is None:
        rep.messages.append(f"A1 fails: f has {len(roots)} zero(s) in [-{L}, {L}], need x_M < 0 < x_m")
        return rep
    rep.x_M, rep.x_m, rep.df_at_xM, rep.df_at_xm = x_M, x_m, dM, dm
    rep.a1_holds = ok
    if not ok:
        rep.messages.append(f"A1 fails: f'(x_M)={dM:.6g}, f'(x_m)={dm:.6g}")
        return rep
    rep.F_xM, rep.F_xm = float(fld.F(x_M)), float(fld.F(x_m))

    rep.x1_star, rep.x2_star = find_F_zeros(fld, rep, tol)
    a2, rep.x1, rep.x2 = check_a2(fld, rep, tol)
    if rep.x1_star is None or rep.x2_star is None:
        a2 = False
    rep.a2_holds = a2
    flags, wit = check_dragilev(fld, rep, grid)
    rep.dragilev = flags
    rep.dragilev_witnesses = wit
    if not a2:
        side = "right" if rep.x2 is None else "left"
        rep.messages.append(f"A2 fails: F never returns to the extremal level on the {side} "
                            f"within [-{L}, {L}]")
        return rep

    rep.x_star, rep.r_star = landmarks(fld, rep)
    rep.uniqueness = check_uniqueness(fld, rep, grid)
    rep.uniqueness_status = "proved-unique" if rep.d_any else "unknown"
    if not rep.d_any:
        rep.messages.append("none of D1-D4 holds; uniqueness of the limit cycle is assumed, not proved")
    rep.p_properties = check_p_properties(fld, rep, grid)
    return rep

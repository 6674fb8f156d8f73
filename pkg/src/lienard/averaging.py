"""First-order averaged function of the radial equation.

For x = r cos(theta), y = -r sin(theta) the averaged function is

    M1(r) = -r int_0^{2pi} f(r cos t) sin^2 t dt = -2 r Fbar(r),
    Fbar(r) = int_{-1}^{1} sqrt(1 - s^2) f(r s) ds,

and its positive zero rho is the radius the limit cycle tends to as
lambda -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_chebyt, roots_chebyu

from .field import LienardField
from .hypothesis import HypothesisReport

QUAD_TOL = 1e-10
RHO_TOL = 1e-11
N_START = 32
N_MAX = 4096
SCAN_POINTS = 512
FORMS = ("polar-f", "polar-F", "radical-F")


class AveragingError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def cheb2_rule(n: int):
    """Gauss-Chebyshev nodes/weights for int_{-1}^{1} sqrt(1-s^2) g(s) ds."""
    return roots_chebyu(n)


@lru_cache(maxsize=None)
def cheb1_rule(n: int):
    """Gauss-Chebyshev nodes/weights for int_{-1}^{1} g(s) / sqrt(1-s^2) ds."""
    return roots_chebyt(n)


def _escalate(rule_sum, tol: float, what: str) -> float:
    n = N_START
    prev = rule_sum(n)
    while n < N_MAX:
        n *= 2
        cur = rule_sum(n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise AveragingError(f"{what}: quadrature did not settle by n={N_MAX}")


def fbar(fld: LienardField, r: float, tol: float = QUAD_TOL) -> float:
    if not r > 0:
        raise ValueError("r must be positive")

    def q(n):
        s, w = cheb2_rule(n)
        return float(np.dot(w, fld.f(r * s)))

    return _escalate(q, tol, f"Fbar({r})")


def _trap_periodic(g, n: int) -> float:
    th = 2 * np.pi * np.arange(n) / n
    return float(2 * np.pi / n * np.sum(g(th)))


def m1(fld: LienardField, r: float, form: str = "polar-f", tol: float = QUAD_TOL) -> float:
    """Averaged function in one of three equivalent integral forms.

    ``polar-f`` and ``polar-F`` use the periodic trapezoidal rule in theta,
    ``radical-F`` substitutes x = r s and integrates s F(r s) against the
    first-kind Chebyshev weight, which removes the endpoint singularity.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if form == "polar-f":
        g = lambda th: np.asarray(fld.f(r * np.cos(th))) * np.sin(th) ** 2
        return -r * _escalate(lambda n: _trap_periodic(g, n), tol, f"M1({r}) polar-f")
    if form == "polar-F":
        g = lambda th: np.cos(th) * np.asarray(fld.F(r * np.cos(th)))
        return -_escalate(lambda n: _trap_periodic(g, n), tol, f"M1({r}) polar-F")
    if form == "radical-F":
        def q(n):
            s, w = cheb1_rule(n)
            return float(np.dot(w, s * np.asarray(fld.F(r * s))))
        # -(2/r) int x F(x)/sqrt(r^2-x^2) dx  ==  -2 int s F(rs)/sqrt(1-s^2) ds
        return -2.0 * _escalate(q, tol, f"M1({r}) radical-F")
    raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")


def fbar_riemann(fld: LienardField, r: float, n: int = 1_000_000) -> float:
    """Midpoint-rule oracle for Fbar; independent of the Chebyshev path."""
    h = 2.0 / n
    s = -1.0 + h * (np.arange(n) + 0.5)
    return float(h * np.sum(np.sqrt(1.0 - s * s) * fld.f(r * s)))


@dataclass
class AveragedProfile:
    rho: float
    bracket: tuple
    samples: list = field(default_factory=list)
    quadrature_nodes: int = N_MAX

    def to_dict(self) -> dict:
        return {"rho": self.rho, "bracket": list(self.bracket),
                "quadrature_nodes": self.quadrature_nodes,
                "samples": [list(p) for p in self.samples]}


def find_rho(fld: LienardField, report: HypothesisReport, tol: float = RHO_TOL,
             scan: int = SCAN_POINTS, quad_tol: float = QUAD_TOL) -> AveragedProfile:
    """Unique positive zero of Fbar, bracketed by (x*, r*)."""
    report.require()
    a, b = report.x_star, report.r_star
    fa, fb = fbar(fld, a, quad_tol), fbar(fld, b, quad_tol)
    if fa == 0.0:
        rho = a
    elif fb == 0.0:
        rho = b
    elif fa < 0 < fb:
        rho = brentq(lambda r: fbar(fld, r, quad_tol), a, b, xtol=tol, rtol=4 * np.finfo(float).eps)
    else:
        raise AveragingError(f"Fbar has no sign change on [x*, r*]: Fbar({a:.6g})={fa:.3g}, "
                             f"Fbar({b:.6g})={fb:.3g}")

    rs = np.linspace(2 * b / scan, 2 * b, scan)
    fv = np.array([fbar(fld, r, quad_tol) for r in rs])
    changes = np.flatnonzero(np.sign(fv[:-1]) * np.sign(fv[1:]) < 0)
    if changes.size != 1 or not (fv[0] < 0 < fv[-1]):
        where = ", ".join(f"{rs[i]:.4g}" for i in changes)
        raise AveragingError(f"Fbar sign pattern on (0, 2r*] is not (-, +): changes near [{where}]")
    samples = [(float(r), float(-2 * r * v)) for r, v in zip(rs, fv)]
    return AveragedProfile(rho=float(rho), bracket=(a, b), samples=samples)


def arctan_bounds(u: float):
    """Both sides of 1/u < arctan(1/sqrt(u^2-1)) < pi/(2u) for u > 1."""
    if not u > 1:
        raise ValueError("u must exceed 1")
    mid = math.atan(1.0 / math.sqrt((u - 1.0) * (u + 1.0)))
    return 1.0 / u < mid, mid < math.pi / (2.0 * u)

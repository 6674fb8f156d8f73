"""Damping functions f for x'' + lambda f(x) x' + x = 0.

A field bundles f, its derivative and the antiderivative F(x) = int_0^x f.
Closed forms are used whenever the family admits them; otherwise F falls
back to adaptive Gauss-Kronrod quadrature and f' to a central difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Mapping, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate


class FieldError(ValueError):
    """Malformed or out-of-range family descriptor."""


# default interval on which rational denominators / positivity are checked
CHECK_INTERVAL = (-50.0, 50.0)
CHECK_GRID = 20001
QUAD_TOL = 1e-12


def _fd_step(x):
    return 1e-6 * np.maximum(1.0, np.abs(x))


@dataclass(frozen=True)
class LienardField:
    """Immutable damping function with derivative and antiderivative.

    ``spec`` is the JSON-style descriptor the field was built from (``None``
    for fields wrapping arbitrary callables, which therefore cannot be
    serialized or shipped to worker processes).
    """

    name: str
    f_impl: Callable[[np.ndarray], np.ndarray]
    df_impl: Optional[Callable[[np.ndarray], np.ndarray]] = None
    F_impl: Optional[Callable[[np.ndarray], np.ndarray]] = None
    spec: Optional[Mapping[str, Any]] = None
    quad_tol: float = QUAD_TOL
    smoothness_class: str = "C2"
    even: bool = dc_field(default=False, compare=False)

    def f(self, x):
        with np.errstate(over="ignore", invalid="ignore"):
            return self.f_impl(x)

    def df(self, x):
        if self.df_impl is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                return self.df_impl(x)
        h = _fd_step(x)
        return (self.f(x + h) - self.f(x - h)) / (2.0 * h)

    def F(self, x):
        if self.F_impl is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                return self.F_impl(x)
        if np.ndim(x) == 0:
            return self._quad_F(float(x))
        xs = np.asarray(x, dtype=float)
        return self._quad_F_many(xs.ravel()).reshape(xs.shape)

    def _quad(self, a: float, b: float) -> float:
        val, err = integrate.quad(
            lambda s: float(self.f(s)), a, b,
            epsabs=self.quad_tol, epsrel=self.quad_tol, limit=500,
        )
        if not (err <= max(1e3 * self.quad_tol, 1e-10 * abs(val))):
            raise ArithmeticError(f"quadrature of f on [{a}, {b}] did not converge (err={err:.3g})")
        return val

    def _quad_F(self, x: float) -> float:
        return 0.0 if x == 0.0 else self._quad(0.0, x)

    def _quad_F_many(self, xs: np.ndarray) -> np.ndarray:
        # accumulate over consecutive sorted abscissas so each quad call is short
        out = np.empty_like(xs)
        for sign in (1.0, -1.0):
            mask = sign * xs > 0
            if not mask.any():
                continue
            u, inv = np.unique(sign * xs[mask], return_inverse=True)
            acc, prev = 0.0, 0.0
            vals = np.empty_like(u)
            for i, v in enumerate(u):
                acc += self._quad(sign * prev, sign * v)
                vals[i] = acc
                prev = v
            out[mask] = vals[inv]
        out[xs == 0] = 0.0
        return out

    @property
    def has_closed_F(self) -> bool:
        return self.F_impl is not None

    def to_dict(self) -> dict:
        if self.spec is None:
            raise TypeError(f"field {self.name!r} wraps a callable and has no descriptor")
        return dict(self.spec)


def eval_f(fld: LienardField, x):
    return fld.f(x)


def eval_df(fld: LienardField, x):
    return fld.df(x)


def eval_F(fld: LienardField, x):
    return fld.F(x)


# -- constructors --------------------------------------------------------------

def polynomial_field(coeffs) -> LienardField:
    """f(x) = sum c_k x^k, coefficients in ascending order."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size == 0 or not np.all(np.isfinite(c)):
        raise FieldError("polynomial family needs finite, not all-zero coefficients")
    dc = P.polyder(c)
    Fc = P.polyint(c)  # constant term 0, so F(0) = 0 exactly
    even = bool(np.all(c[1::2] == 0))
    return LienardField(
        name="polynomial",
        f_impl=lambda x: P.polyval(x, c),
        df_impl=lambda x: P.polyval(x, dc),
        F_impl=lambda x: P.polyval(x, Fc),
        spec={"family": "polynomial", "coeffs": [float(v) for v in c]},
        even=even,
    )


def generalized_vdp_field(x_M: float, x_m: float, fbar) -> LienardField:
    """f(x) = (x - x_M)(x - x_m) fbar(x) with fbar a positive polynomial."""
    if not x_M < 0 < x_m:
        raise FieldError("generalized family needs x_M < 0 < x_m")
    fb = np.asarray(fbar, dtype=float)
    grid = np.linspace(*CHECK_INTERVAL, CHECK_GRID)
    vals = P.polyval(grid, fb)
    if np.any(vals <= 0):
        i = int(np.argmin(vals))
        raise FieldError(f"fbar must be positive; fbar({grid[i]:.6g}) = {vals[i]:.6g}")
    coeffs = P.polymul(P.polyfromroots([x_M, x_m]), fb)
    fld = polynomial_field(coeffs)
    spec = {"family": "generalized", "x_M": float(x_M), "x_m": float(x_m),
            "fbar": [float(v) for v in fb]}
    return LienardField("generalized", fld.f_impl, fld.df_impl, fld.F_impl, spec, even=fld.even)


def rational_field(x_M: float, x_m: float, p, q, interval=CHECK_INTERVAL) -> LienardField:
    """f(x) = (x - x_M)(x - x_m) p(x) / q(x) with p q > 0.

    F has no closed form in general and is evaluated by quadrature.
    """
    if not x_M < 0 < x_m:
        raise FieldError("rational family needs x_M < 0 < x_m")
    pc = np.trim_zeros(np.asarray(p, dtype=float), "b")
    qc = np.trim_zeros(np.asarray(q, dtype=float), "b")
    if pc.size == 0 or qc.size == 0:
        raise FieldError("rational family needs nonzero p and q")
    if not (qc.size - 1) < 2 + (pc.size - 1):
        raise FieldError(f"degree violation: deg(q)={qc.size - 1} must be < 2 + deg(p)={pc.size + 1}")
    lo, hi = interval
    if qc.size > 1:
        for r in P.polyroots(qc):
            if abs(r.imag) < 1e-12 and lo <= r.real <= hi:
                raise FieldError(f"q has a real root at x={r.real:.12g} inside [{lo}, {hi}]")
    grid = np.linspace(lo, hi, CHECK_GRID)
    pq = P.polyval(grid, pc) * P.polyval(grid, qc)
    if np.any(pq <= 0):
        i = int(np.argmin(pq))
        raise FieldError(f"p*q must be positive; p*q({grid[i]:.6g}) = {pq[i]:.6g}")

    num = P.polymul(P.polyfromroots([x_M, x_m]), pc)
    dnum = P.polyder(num)
    dq = P.polyder(qc)

    def f(x):
        return P.polyval(x, num) / P.polyval(x, qc)

    def df(x):
        qv = P.polyval(x, qc)
        return (P.polyval(x, dnum) * qv - P.polyval(x, num) * P.polyval(x, dq)) / qv**2

    spec = {"family": "rational", "x_M": float(x_M), "x_m": float(x_m),
            "p": [float(v) for v in pc], "q": [float(v) for v in qc]}
    return LienardField("rational", f, df, None, spec)


def exp_field(b: float) -> LienardField:
    """f(x) = e^x + e^-x - b, b > 2."""
    b = float(b)
    if not b > 2:
        raise FieldError(f"parameter out of range: exp family needs b > 2, got {b}")
    return LienardField(
        name="exp",
        f_impl=lambda x: np.exp(x) + np.exp(-x) - b,
        df_impl=lambda x: np.exp(x) - np.exp(-x),
        F_impl=lambda x: np.exp(x) - np.exp(-x) - b * x,
        spec={"family": "exp", "b": b},
        even=True,
    )


def gauss_field(a: float) -> LienardField:
    """f(x) = (2x^2 - 1) e^{-x^2} + a, 0 < a < 1."""
    a = float(a)
    if not 0 < a < 1:
        raise FieldError(f"parameter out of range: gauss family needs 0 < a < 1, got {a}")

    def f(x):
        return (2 * x**2 - 1) * np.exp(-x**2) + a

    def df(x):
        return (6 * x - 4 * x**3) * np.exp(-x**2)

    def F(x):
        return x * (a - np.exp(-x**2))

    return LienardField("gauss", f, df, F, spec={"family": "gauss", "a": a}, even=True)


def callable_field(f, F=None, df=None, name="generic", vectorized=False) -> LienardField:
    """Wrap user callables. Non-vectorized callables are lifted with np.vectorize."""
    if not callable(f):
        raise FieldError("generic family needs a callable f")

    def lift(g):
        if g is None or vectorized:
            return g
        vg = np.vectorize(lambda v: float(g(float(v))), otypes=[float])

        def wrapped(x):
            if np.ndim(x) == 0:
                return float(g(float(x)))
            return vg(x)
        return wrapped

    return LienardField(name, lift(f), lift(df), lift(F), spec=None)


def build_field(spec) -> LienardField:
    """Build a field from a descriptor mapping (or pass a field through).

    Recognised families: ``polynomial`` (coeffs), ``generalized`` (x_M, x_m,
    fbar), ``rational`` (x_M, x_m, p, q), ``exp`` (b), ``gauss`` (a) and
    ``generic`` (f, optional F and df callables).
    """
    if isinstance(spec, LienardField):
        return spec
    if not isinstance(spec, Mapping) or "family" not in spec:
        raise FieldError("field descriptor must be a mapping with a 'family' key")
    fam = spec["family"]
    try:
        if fam == "polynomial":
            return polynomial_field(spec["coeffs"])
        if fam == "generalized":
            return generalized_vdp_field(spec["x_M"], spec["x_m"], spec.get("fbar", [1.0]))
        if fam == "rational":
            interval = tuple(spec.get("interval", CHECK_INTERVAL))
            return rational_field(spec["x_M"], spec["x_m"], spec["p"], spec["q"], interval)
        if fam == "exp":
            return exp_field(spec["b"])
        if fam == "gauss":
            return gauss_field(spec["a"])
        if fam == "generic":
            return callable_field(spec["f"], spec.get("F"), spec.get("df"),
                                  vectorized=spec.get("vectorized", False))
    except KeyError as exc:
        raise FieldError(f"{fam} family descriptor is missing key {exc}") from None
    raise FieldError(f"unknown family {fam!r}")


def van_der_pol() -> LienardField:
    return polynomial_field([-1.0, 0.0, 1.0])


def is_finite(v) -> bool:
    return bool(np.all(np.isfinite(v)))


__all__ = [
    "FieldError", "LienardField", "build_field", "eval_f", "eval_df", "eval_F",
    "polynomial_field", "generalized_vdp_field", "rational_field", "exp_field",
    "gauss_field", "callable_field", "van_der_pol", "is_finite",
]

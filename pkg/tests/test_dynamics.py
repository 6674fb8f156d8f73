import math

import numpy as np
import pytest

from lienard import averaging, dynamics, field, geometry
from lienard.dynamics import DynamicsError


def test_vector_field_examples(vdp, exp3):
    assert dynamics.vector_field(vdp, 1.0, (0.0, 1.0)) == pytest.approx((1.0, 1.0))
    for fld in (vdp, exp3):
        assert dynamics.vector_field(fld, 3.0, (0.0, 0.0)) == pytest.approx((0.0, 0.0))


def test_slow_fast_field(vdp):
    assert dynamics.slow_fast_field(vdp, 0.01, (0.0, 1.0)) == pytest.approx((100.0, 0.0))
    x = 1.3
    assert dynamics.slow_fast_field(vdp, 0.01, (x, float(vdp.F(x))))[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        dynamics.slow_fast_field(vdp, 0.0, (0.0, 0.0))


def test_equilibrium_stays_put(vdp):
    tr = dynamics.integrate(vdp, 1.0, (0.0, 0.0), 10.0)
    assert np.all(tr.states == 0.0)


def test_linear_center(vdp):
    tr = dynamics.integrate(vdp, 0.0, (2.0, 0.0), 2 * math.pi)
    assert tr.final == pytest.approx([2.0, 0.0], abs=1e-8)


def test_spiral_toward_cycle(vdp):
    tr = dynamics.integrate(vdp, 0.1, (0.5, 0.0), 200.0)
    r = np.hypot(*tr.states.T)
    tail = r[tr.times > 160.0]
    # O(lambda) ripple around the radius-2 circle
    assert 1.9 < tail.min() and tail.max() < 2.1


def test_slow_fast_chart_agrees_with_plane(vdp):
    a = dynamics.integrate(vdp, 6.0, (1.0, 0.5), 3.0, slow_fast=False)
    b = dynamics.integrate(vdp, 6.0, (1.0, 0.5), 3.0, slow_fast=True)
    assert b.coordinate_chart != a.coordinate_chart
    assert b.final == pytest.approx(a.final, abs=1e-6)


def test_escape_is_reported():
    neg = field.polynomial_field([-1.0])
    with pytest.raises(DynamicsError):
        dynamics.integrate(neg, 1.0, (1.0, 0.0), 100.0, box=1e3)


def test_poincare_small_lambda(vdp):
    assert dynamics.poincare_return(vdp, 1e-6, 1.3) == pytest.approx(1.3, abs=1e-5)
    assert dynamics.poincare_return(vdp, 0.1, 2.0) == pytest.approx(2.0, abs=0.02)
    assert dynamics.displacement(vdp, 0.1, 1.0) > 0
    assert dynamics.displacement(vdp, 0.1, 3.0) < 0


def test_poincare_matches_first_order(vdp):
    lam, r = 0.01, 1.5
    pred = r + lam * averaging.m1(vdp, r)
    assert dynamics.poincare_return(vdp, lam, r) == pytest.approx(pred, abs=5 * lam**2)


def test_limit_cycle_small_lambda(vdp, vdp_report):
    c = dynamics.find_limit_cycle(vdp, 0.05, report=vdp_report, rho=2.0)
    assert abs(c.xi_plus - 2.0) < 0.02
    assert c.stable
    assert c.period == pytest.approx(2 * math.pi, rel=0.01)
    assert geometry.hausdorff(c.points, geometry.circle(2.0, 1024)) < 0.05


def test_limit_cycle_large_lambda(vdp, vdp_report):
    c = dynamics.find_limit_cycle(vdp, 10.0, report=vdp_report)
    assert c.chart == "slow-fast-plane"
    assert c.stable
    assert abs(c.xi_plus - 2.0) < 0.1 and abs(c.xi_minus + 2.0) < 0.1
    assert dynamics.bendixson_check(c, vdp_report)


def test_limit_cycle_rejects_lambda(vdp):
    with pytest.raises(ValueError):
        dynamics.find_limit_cycle(vdp, 0.0)


def test_sweep_and_trends(vdp, vdp_report):
    assert dynamics.amplitude_sweep(vdp, [], report=vdp_report) == []
    rows = dynamics.amplitude_sweep(vdp, [0.1, 0.05], report=vdp_report, rho=2.0)
    assert all(r.ok for r in rows)
    assert all(abs(r.xi_plus - 2.0) < 0.05 for r in rows)
    tr = dynamics.amplitude_trends(rows, 2.0, -2.0, 2.0)
    assert tr["small_lambda"] == "decreasing"
    assert tr["large_lambda"] == "insufficient-data"


def test_trend_verdicts():
    mk = lambda lam, xp: dynamics.SweepRow(lam, -xp, xp, 1.0, True)
    rows = [mk(0.4, 2.1), mk(0.2, 2.05), mk(0.1, 2.01)]
    assert dynamics.amplitude_trends(rows, 2.0, -2, 2)["small_lambda"] == "decreasing"
    rows = [mk(0.4, 2.01), mk(0.2, 2.05)]
    assert dynamics.amplitude_trends(rows, 2.0, -2, 2)["small_lambda"] == "not-decreasing"
    assert dynamics.amplitude_trends([mk(0.1, 2.0)], 2.0, -2, 2)["small_lambda"] == "insufficient-data"


def _fake_cycle(xs):
    pts = np.column_stack([xs, np.zeros_like(xs)])
    pts[1, 1] = 0.1
    return dynamics.LimitCycle(1.0, geometry.ClosedCurve(pts), 1.0, float(xs.min()), float(xs.max()),
                               "stable", float(xs.max()))


def test_bendixson_synthetic(vdp_report):
    assert not dynamics.bendixson_check(_fake_cycle(np.array([-0.5, 0.0, 0.5])), vdp_report)
    assert dynamics.bendixson_check(_fake_cycle(np.array([-0.5, 0.0, 1.0])), vdp_report)

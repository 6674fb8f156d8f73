"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

from lienard import averaging, bounds, cli, dynamics, field, geometry, hypothesis

SQ3 = math.sqrt(3.0)
SMALL = [0.4, 0.2, 0.1, 0.05]
LARGE = [5.0, 10.0, 20.0]


@pytest.fixture(scope="module")
def small_cycles(vdp, vdp_report):
    t = time.perf_counter()
    cycles = [dynamics.find_limit_cycle(vdp, lam, report=vdp_report, rho=2.0) for lam in SMALL]
    s2 = geometry.circle(2.0, 2048)
    d = [geometry.hausdorff(c.points, s2) for c in cycles]
    return cycles, d, time.perf_counter() - t


@pytest.fixture(scope="module")
def large_cycles(vdp, vdp_report):
    t = time.perf_counter()
    g0 = geometry.build_gamma0(vdp, vdp_report, 2000).curve()
    cycles = [dynamics.find_limit_cycle(vdp, lam, report=vdp_report) for lam in LARGE]
    d = [geometry.hausdorff(geometry.ClosedCurve(dynamics.lienard_to_slow_fast(vdp, c)), g0)
         for c in cycles]
    return cycles, d, time.perf_counter() - t


def test_c01_vdp_golden_values(criterion):
    t = time.perf_counter()
    fld = field.van_der_pol()
    rep = hypothesis.analyze(fld)
    rho = averaging.find_rho(fld, rep).rho
    dt = time.perf_counter() - t
    got = np.array([rep.x_M, rep.x_m, rep.x1_star, rep.x2_star, rep.x1, rep.x2, rep.x_star, rep.r_star, rho])
    want = np.array([-1, 1, -SQ3, SQ3, -2, 2, SQ3, 4, 2])
    err = float(np.max(np.abs(got - want)))
    criterion(1, err < 1e-9 and dt < 1.0, f"max landmark error {err:.2e} (tol 1e-9), runtime {dt:.3f}s (< 1s)")


def test_c02_fbar_closed_form(criterion, vdp):
    rs = np.linspace(0.1, 6.0, 100)
    err = max(abs(averaging.fbar(vdp, r) - (r * r - 4) * math.pi / 8) for r in rs)
    criterion(2, err < 1e-9, f"max |Fbar - (r^2-4)pi/8| = {err:.2e} (tol 1e-9)")


def test_c03_three_forms(criterion, vdp, exp3, gauss05):
    rng = np.random.default_rng(3)
    rs = rng.uniform(0.1, 8.0, 64)
    worst = 0.0
    for fld in (vdp, exp3, gauss05):
        for r in rs:
            v = [averaging.m1(fld, r, form) for form in averaging.FORMS]
            worst = max(worst, abs(v[0] - v[1]), abs(v[0] - v[2]), abs(v[1] - v[2]))
    criterion(3, worst < 1e-7, f"max pairwise M1 gap {worst:.2e} over 3 fields x 64 r (tol 1e-7)")


def test_c04_small_lambda(criterion, small_cycles):
    _, d, dt = small_cycles
    dec = all(b < a for a, b in zip(d, d[1:]))
    txt = ", ".join(f"{lam}: {v:.4f}" for lam, v in zip(SMALL, d))
    criterion(4, dec and d[-1] < 0.05 and dt < 30,
              f"d_H(Phi, S_2) {txt}; decreasing={dec}, runtime {dt:.1f}s (< 30s)")


def test_c05_large_lambda(criterion, large_cycles):
    cycles, d, dt = large_cycles
    dec = all(b < a for a, b in zip(d, d[1:]))
    charts = {c.chart for c in cycles}
    txt = ", ".join(f"{lam:g}: {v:.4f}" for lam, v in zip(LARGE, d))
    criterion(5, dec and d[-1] < 0.1 and dt < 60 and charts == {"slow-fast-plane"},
              f"d_H(P(Phi), Gamma_0) {txt}; decreasing={dec}, chart={sorted(charts)}, runtime {dt:.1f}s (< 60s)")


def test_c06_poincare_expansion(criterion, vdp):
    lams = [0.02, 0.01, 0.005]
    worst = 1.0
    parts = []
    for r in (1.0, 1.5, 3.0):
        m = averaging.m1(vdp, r)
        q = [abs(dynamics.poincare_return(vdp, lam, r, tol=1e-12) - r - lam * m) / lam**2 for lam in lams]
        band = max(q) / min(q) if min(q) > 0 else math.inf
        worst = max(worst, band)
        parts.append(f"r={r:g}: " + "/".join(f"{v:.3g}" for v in q))
    criterion(6, worst <= 4.0, f"remainder/lambda^2 {'; '.join(parts)}; worst band factor {worst:.3f} (<= 4)")


def test_c07_bendixson(criterion, vdp_report, small_cycles, large_cycles):
    cycles = small_cycles[0] + large_cycles[0]
    ok = [dynamics.bendixson_check(c, vdp_report) for c in cycles]
    criterion(7, all(ok), f"{sum(ok)}/{len(ok)} cycles reach x <= x_M or x >= x_m")


def test_c08_region(criterion, vdp, vdp_report):
    x0 = 3.0
    notes, ok = [], True
    for lam in (0.1, 0.5, 1.0, 2.0, 5.0):
        c = dynamics.find_limit_cycle(vdp, lam, report=vdp_report, rho=2.0)
        reg = bounds.build_region(vdp, lam, x0)
        inside, _ = bounds.region_contains(c, reg)
        inward, worst = bounds.inward_flow_check(vdp, lam, x0, reg.m, n=512)
        ok &= inside and inward
        notes.append(f"lam={lam:g} inside={inside} inward={inward}")
    m = bounds.min_f(vdp, x0)
    s = bounds.branch_switch(m)
    xs = np.linspace(-x0, x0, 1001)
    jump = float(np.max(np.abs(bounds.gamma_bound(xs, s * (1 - 1e-12), x0, m)
                               - bounds.gamma_bound(xs, s * (1 + 1e-12), x0, m))))
    dia = 0.0
    for lam in (0.1, 0.25, 0.5, 1.0, 2.0, 5.0):
        corner = math.hypot(2 * x0, 2 * bounds.gamma_bound(x0, lam, x0, m))
        dia = max(dia, abs(bounds.region_diameter(lam, x0, m) - corner))
    ok &= s == pytest.approx(0.5) and jump < 1e-8 and dia < 1e-10
    criterion(8, ok, f"{'; '.join(notes)}; gamma jump at lambda={s:g}: {jump:.1e} (tol 1e-8); "
                     f"diameter vs corner distance {dia:.1e} (tol 1e-10)")


def test_c09_arctan_inequalities(criterion):
    u = 1.0 + np.logspace(-9, math.log10(1e6 - 1.0), 10_001)[1:]
    res = [averaging.arctan_bounds(float(v)) for v in u]
    lo = sum(a for a, _ in res)
    hi = sum(b for _, b in res)
    criterion(9, lo == hi == len(u), f"lower holds {lo}/{len(u)}, upper holds {hi}/{len(u)}")


@pytest.mark.parametrize("name", ["exp3", "gauss05"])
def test_c10_nonpolynomial(criterion, request, name):
    fld = request.getfixturevalue(name)
    rep = request.getfixturevalue(name + "_report")
    rho = averaging.find_rho(fld, rep).rho
    c = dynamics.find_limit_cycle(fld, 0.05, report=rep, rho=rho)
    d = geometry.hausdorff(c.points, geometry.circle(rho, 2048))
    ok = rep.a1_holds and rep.a2_holds and rep.uniqueness["D2"].holds
    ok &= rep.x_star < rho < rep.r_star and d < 0.05
    detail = f"{name}: A1={rep.a1_holds} A2={rep.a2_holds} D2={rep.uniqueness['D2'].holds} " \
             f"rho={rho:.6f} in ({rep.x_star:.4f}, {rep.r_star:.4f}), d_H(Phi(0.05), S_rho)={d:.4f}"
    if name == "exp3":
        b = 3.0
        zM, zm = math.log((b - math.sqrt(b * b - 4)) / 2), math.log((b + math.sqrt(b * b - 4)) / 2)
        zerr = max(abs(rep.x_M - zM), abs(rep.x_m - zm))
        ok &= zerr < 1e-9
        detail += f", f1 zero error {zerr:.1e} (tol 1e-9)"
    criterion(10, ok, detail)


def test_c11_oracles(criterion, vdp, exp3, gauss05):
    rng = np.random.default_rng(11)
    fields = [vdp, exp3, gauss05, field.generalized_vdp_field(-1.5, 0.5, [2.0])]
    fb = 0.0
    for _ in range(20):
        fld = fields[rng.integers(len(fields))]
        r = rng.uniform(0.1, 6.0)
        fb = max(fb, abs(averaging.fbar(fld, r) - averaging.fbar_riemann(fld, r)))
    hd = 0.0
    for _ in range(10):
        a = geometry.ClosedCurve(rng.normal(size=(rng.integers(3, 12), 2)))
        b = geometry.ClosedCurve(rng.normal(size=(rng.integers(3, 12), 2)) + rng.normal(size=2))
        pa, pb = geometry.densify(a, 5e-4), geometry.densify(b, 5e-4)
        ref = max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])
        hd = max(hd, abs(geometry.hausdorff(a, b) - ref))
    criterion(11, fb < 1e-6 and hd < 2e-3,
              f"Fbar vs midpoint max gap {fb:.1e} (tol 1e-6); Hausdorff vs point cloud max gap {hd:.1e} (tol 2e-3)")


def _tree(root):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


def test_c12_determinism(criterion, tmp_path):
    cfg = {"field": {"family": "polynomial", "coeffs": [-1.0, 0.0, 1.0]}, "lambdas": [0.1, 0.4, 5.0]}
    dirs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        c = cli.AnalysisConfig.from_dict({**cfg, "out": str(out)})
        assert cli.cmd_analyze(c) == 0
        assert cli.cmd_sweep(c) == 0
        dirs.append(out)
    names = _tree(dirs[0])
    same = names == _tree(dirs[1]) and all(
        (dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names)
    criterion(12, same and len(names) >= 4, f"{len(names)} files compared byte for byte: identical={same}")

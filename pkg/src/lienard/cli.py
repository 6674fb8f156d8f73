"""Command-line front end: ``lienard {analyze,cycle,sweep,render}``.

Exit codes: 0 success, 1 numerical or hypothesis failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import averaging, bounds, dynamics, export, geometry, hypothesis
from .field import FieldError, build_field

DEFAULT_LAMBDAS = [0.05, 0.1, 0.2, 0.4, 1.0, 2.0, 5.0, 10.0, 20.0]
FORMATS = ("json", "csv", "svg")
SMALL_TREND_MAX = 0.5
X0_GROW = 1.25
X0_GROW_STEPS = 8


class ConfigError(ValueError):
    pass


@dataclass
class AnalysisConfig:
    field: dict
    L: float = hypothesis.DEFAULT_L
    root_tol: float = hypothesis.ROOT_TOL
    quad_tol: float = averaging.QUAD_TOL
    integrator_tol: float = dynamics.RTOL
    lambdas: list = field(default_factory=lambda: list(DEFAULT_LAMBDAS))
    samples: int = 400
    x0: Optional[float] = None
    out: str = "out"
    formats: tuple = FORMATS
    seed_r: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.field, dict) or "family" not in self.field:
            raise ConfigError("config needs a 'field' object with a 'family' key")
        for name in ("L", "root_tol", "quad_tol", "integrator_tol"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"{name} must be positive")
        if any(not float(l) > 0 for l in self.lambdas):
            raise ConfigError("every lambda in the grid must be positive")
        if self.x0 is not None and not float(self.x0) > 0:
            raise ConfigError("x0 must be positive")
        if int(self.samples) < 3:
            raise ConfigError("samples must be >= 3")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output formats: {sorted(bad)}")
        if int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        d = dict(d)
        tols = d.pop("tolerances", {}) or {}
        kw = {}
        for key in ("field", "L", "lambdas", "samples", "x0", "out", "formats", "seed_r", "workers"):
            if key in d:
                kw[key] = d.pop(key)
        for src, dst in (("root", "root_tol"), ("quadrature", "quad_tol"), ("integrator", "integrator_tol")):
            if src in tols:
                kw[dst] = tols[src]
        if d:
            raise ConfigError(f"unknown config keys: {sorted(d)}")
        if "formats" in kw:
            kw["formats"] = tuple(kw["formats"])
        if "lambdas" in kw:
            kw["lambdas"] = [float(v) for v in kw["lambdas"]]
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(args) -> AnalysisConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
    if getattr(args, "field", None):
        try:
            data["field"] = json.loads(args.field)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--field is not valid JSON: {exc}") from None
    if "field" not in data:
        raise ConfigError("no field given (use --config or --field)")
    cfg = AnalysisConfig.from_dict(data)
    over = {}
    if getattr(args, "out", None):
        over["out"] = args.out
    if getattr(args, "formats", None):
        over["formats"] = tuple(s.strip() for s in args.formats.split(",") if s.strip())
    if getattr(args, "x0", None) is not None:
        over["x0"] = args.x0
    if getattr(args, "seed_r", None) is not None:
        over["seed_r"] = args.seed_r
    if getattr(args, "workers", None) is not None:
        over["workers"] = args.workers
    if getattr(args, "lambdas", None):
        over["lambdas"] = [float(v) for v in args.lambdas.split(",")]
    return replace(cfg, **over) if over else cfg


# -- shared pipeline -----------------------------------------------------------

def _prepare(cfg: AnalysisConfig):
    fld = build_field(cfg.field)
    rep = hypothesis.analyze(fld, L=cfg.L, tol=cfg.root_tol)
    return fld, rep


def _cycle_record(fld, rep, rho, lam, cfg: AnalysisConfig, gamma0=None, hint=None):
    """Cycle at lam plus its distances to S_rho and (in the slow-fast plane) to Gamma_0."""
    cyc = dynamics.find_limit_cycle(fld, lam, hint, report=rep, rho=rho, tol=cfg.integrator_tol)
    if gamma0 is None:
        gamma0 = geometry.build_gamma0(fld, rep, cfg.samples).curve()
    s_rho = geometry.circle(rho, max(4 * cfg.samples, 512))
    image = geometry.ClosedCurve(dynamics.lienard_to_slow_fast(fld, cyc))
    return {
        "cycle": cyc,
        "d_circle": geometry.hausdorff(cyc.points, s_rho),
        "d_gamma0": geometry.hausdorff(image, gamma0),
        "bendixson": dynamics.bendixson_check(cyc, rep),
    }


def _sweep_worker(args):
    field_spec, rep, rho, lam, cfg = args
    fld = build_field(field_spec)
    try:
        rec = _cycle_record(fld, rep, rho, lam, cfg)
    except (dynamics.DynamicsError, ValueError, ArithmeticError) as exc:
        return {"lambda": lam, "error": str(exc)}
    return {"lambda": lam, **rec}


# -- commands ------------------------------------------------------------------

def cmd_analyze(cfg: AnalysisConfig) -> int:
    fld, rep = _prepare(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"field": fld.to_dict() if fld.spec else None, "report": rep.to_dict(), "averaging": None}
    code = 0
    if not rep.passed:
        code = 1
        for msg in rep.messages:
            print(msg, file=sys.stderr)
    else:
        try:
            prof = averaging.find_rho(fld, rep, quad_tol=cfg.quad_tol)
        except averaging.AveragingError as exc:
            print(f"averaging failed: {exc}", file=sys.stderr)
            code = 1
        else:
            doc["averaging"] = {"rho": prof.rho, "bracket": list(prof.bracket),
                                "quadrature_nodes": prof.quadrature_nodes}
            if "csv" in cfg.formats:
                export.write_csv(out / "m1.csv", ["r", "m1"], prof.samples)
    doc["rho"] = doc["averaging"]["rho"] if doc["averaging"] else None
    if "json" in cfg.formats:
        export.write_json(out / "report.json", doc)
    if code == 0:
        print(f"A1 and A2 hold; x*={rep.x_star!r} r*={rep.r_star!r} rho={doc['rho']!r} "
              f"uniqueness={rep.uniqueness_status}")
    return code


def _x0_for(cfg, rep, rho, amplitudes):
    if cfg.x0 is not None:
        return float(cfg.x0)
    return bounds.choose_x0(rep, rho, amplitudes)


def _contain(fld, cycles, x0, fixed):
    """Containment of each (lam, cycle) in R_lam; a heuristic x0 grows until all fit."""
    check = lambda v: [bounds.region_contains(c, bounds.build_region(fld, lam, v))[0] for lam, c in cycles]
    flags = check(x0)
    steps = 0
    while not all(flags) and not fixed and steps < X0_GROW_STEPS:
        x0 *= X0_GROW
        flags = check(x0)
        steps += 1
    return flags, x0


def cmd_cycle(cfg: AnalysisConfig, lam: float) -> int:
    if not lam > 0:
        print("lambda must be positive", file=sys.stderr)
        return 2
    fld, rep = _prepare(cfg)
    if not rep.passed:
        for msg in rep.messages:
            print(msg, file=sys.stderr)
        return 1
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        rho = averaging.find_rho(fld, rep, quad_tol=cfg.quad_tol).rho
        g0 = geometry.build_gamma0(fld, rep, cfg.samples)
        rec = _cycle_record(fld, rep, rho, lam, cfg, g0.curve(), cfg.seed_r)
    except (dynamics.DynamicsError, averaging.AveragingError, ArithmeticError) as exc:
        print(f"cycle computation failed: {exc}", file=sys.stderr)
        return 1
    cyc = rec["cycle"]
    x0 = _x0_for(cfg, rep, rho, [(cyc.xi_minus, cyc.xi_plus)])
    _, x0 = _contain(fld, [(lam, cyc)], x0, cfg.x0 is not None)
    region = bounds.build_region(fld, lam, x0)
    inside, witness = bounds.region_contains(cyc, region)
    inward, worst = bounds.inward_flow_check(fld, lam, x0, region.m)

    tag = export.fmt(float(lam))
    summary = {
        **cyc.summary(),
        "d_hausdorff_circle": rec["d_circle"],
        "d_hausdorff_gamma0": rec["d_gamma0"],
        "rho": rho,
        "bendixson": rec["bendixson"],
        "region": {"x0": x0, "m": region.m, "branch": region.branch, "diameter": region.diameter,
                   "contains_cycle": inside, "violation": witness,
                   "inward_flow": inward, "inward_worst": worst},
    }
    if "json" in cfg.formats:
        export.write_json(out / f"cycle_{tag}.json", summary)
    if "csv" in cfg.formats:
        export.write_curve_csv(out / f"cycle_{tag}.csv", cyc.points.points, cyc.times)
    if "svg" in cfg.formats:
        gamma_back = geometry.map_P_inv(fld, lam, g0.curve().points)
        curves = [
            (f"limit cycle, lambda={tag}", cyc.points.points, True),
            (f"S_rho, rho={rho:.6g}", geometry.circle(rho, 720).points, True),
            ("P_lambda^-1(Gamma_0)", gamma_back, True),
            (f"R_lambda boundary, x0={x0:.4g}", region.boundary(cfg.samples), True),
        ]
        export.write_svg(out / f"overlay_{tag}.svg", curves, title=f"lambda = {tag}")
    print(f"lambda={tag} xi-={cyc.xi_minus!r} xi+={cyc.xi_plus!r} period={cyc.period!r} "
          f"stability={cyc.stability}")
    print(f"d_H(Phi, S_rho)={rec['d_circle']!r}  d_H(P(Phi), Gamma_0)={rec['d_gamma0']!r}")
    print(f"bendixson={rec['bendixson']} contained_in_R={inside} inward_flow={inward}")
    return 0


def _trend(values) -> str:
    v = [x for x in values if x is not None and np.isfinite(x)]
    if len(v) < 2:
        return "insufficient-data"
    return "decreasing" if all(b < a for a, b in zip(v, v[1:])) else "not-decreasing"


def cmd_sweep(cfg: AnalysisConfig) -> int:
    if not cfg.lambdas:
        print("lambda grid is empty", file=sys.stderr)
        return 2
    fld, rep = _prepare(cfg)
    if not rep.passed:
        for msg in rep.messages:
            print(msg, file=sys.stderr)
        return 1
    try:
        rho = averaging.find_rho(fld, rep, quad_tol=cfg.quad_tol).rho
    except averaging.AveragingError as exc:
        print(f"averaging failed: {exc}", file=sys.stderr)
        return 1
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    lams = list(cfg.lambdas)
    jobs = [(fld.spec, rep, rho, lam, cfg) for lam in lams]
    if cfg.workers > 1 and fld.spec is not None and len(lams) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(lams))) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    elif fld.spec is not None:
        results = [_sweep_worker(j) for j in jobs]
    else:
        results = []
        for lam in lams:
            try:
                results.append({"lambda": lam, **_cycle_record(fld, rep, rho, lam, cfg)})
            except (dynamics.DynamicsError, ValueError, ArithmeticError) as exc:
                results.append({"lambda": lam, "error": str(exc)})

    good = [r for r in results if "error" not in r]
    amps = [(r["cycle"].xi_minus, r["cycle"].xi_plus) for r in good]
    x0 = _x0_for(cfg, rep, rho, amps)
    flags, x0 = _contain(fld, [(r["lambda"], r["cycle"]) for r in good], x0, cfg.x0 is not None)
    inside_by_lam = {r["lambda"]: f for r, f in zip(good, flags)}
    rows = []
    for r in results:
        lam = r["lambda"]
        if "error" in r:
            rows.append([lam, None, None, None, None, None, None, None, None, "failed: " + r["error"]])
            continue
        c = r["cycle"]
        inside = inside_by_lam[lam]
        rows.append([lam, c.xi_minus, c.xi_plus, c.period, c.stable, r["d_circle"],
                     r["d_gamma0"], r["bendixson"], inside, "ok"])

    header = ["lambda", "xi_minus", "xi_plus", "period", "stable", "d_hausdorff_circle",
              "d_hausdorff_gamma0", "bendixson", "contained", "status"]
    if "csv" in cfg.formats:
        export.write_csv(out / "sweep.csv", header, rows)

    by_lam = sorted(good, key=lambda r: r["lambda"])
    small = [r["d_circle"] for r in by_lam if r["lambda"] <= SMALL_TREND_MAX][::-1]
    large = [r["d_gamma0"] for r in by_lam if r["lambda"] >= dynamics.STIFF_LAMBDA]
    sweep_rows = [dynamics.SweepRow(r["lambda"], r["cycle"].xi_minus, r["cycle"].xi_plus,
                                    r["cycle"].period, r["cycle"].stable) for r in good]
    amp = dynamics.amplitude_trends(sweep_rows, rho, rep.x1, rep.x2, SMALL_TREND_MAX)
    asym = {
        "small_lambda_circle": {"lambdas_desc": [r["lambda"] for r in by_lam
                                                 if r["lambda"] <= SMALL_TREND_MAX][::-1],
                                "d_hausdorff": small, "verdict": _trend(small)},
        "large_lambda_gamma0": {"lambdas_asc": [r["lambda"] for r in by_lam
                                                if r["lambda"] >= dynamics.STIFF_LAMBDA],
                                "d_hausdorff": large, "verdict": _trend(large)},
        "amplitude_trends": amp,
        "rho": rho, "x1": rep.x1, "x2": rep.x2, "x0": x0,
        "failed": [r["lambda"] for r in results if "error" in r],
    }
    if "json" in cfg.formats:
        export.write_json(out / "asymptotics.json", asym)
    for row in rows:
        print(",".join(export.fmt(v) for v in row))
    print(f"small-lambda trend: {asym['small_lambda_circle']['verdict']}; "
          f"large-lambda trend: {asym['large_lambda_gamma0']['verdict']}")
    return 0 if good else 1


def cmd_render(files, out_svg) -> int:
    if not files:
        print("render needs at least one CSV file", file=sys.stderr)
        return 2
    curves = []
    seen = set()
    for name in files:
        p = Path(name)
        try:
            pts = export.read_curve_csv(p)
        except (OSError, ValueError) as exc:
            print(f"cannot read {p}: {exc}", file=sys.stderr)
            return 2
        key = p.resolve()
        if key in seen:
            print(f"warning: {p} given more than once; rendering it again", file=sys.stderr)
        seen.add(key)
        curves.append((p.stem, pts, True))
    export.write_svg(out_svg, curves)
    return 0


# -- entry point ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lienard", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--field", metavar="JSON", help="field descriptor, overrides the config")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--formats", metavar="LIST", help="comma-separated subset of json,csv,svg")
        p.add_argument("--x0", type=float, help="override the strip half-width x0")
        p.add_argument("--workers", type=int, help="worker processes for sweeps")

    common(sub.add_parser("analyze", help="check hypotheses, landmarks and rho"))
    p = sub.add_parser("cycle", help="limit cycle at one lambda")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--seed-r", dest="seed_r", type=float, help="starting abscissa on y=0, x>0")
    p = sub.add_parser("sweep", help="cycles over the lambda grid")
    common(p)
    p.add_argument("--lambdas", metavar="LIST", help="comma-separated lambda grid")
    p = sub.add_parser("render", help="overlay x,y CSV curves in one SVG")
    p.add_argument("files", nargs="*")
    p.add_argument("-o", "--output", default="overlay.svg")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "render":
        return cmd_render(args.files, args.output)
    try:
        cfg = load_config(args)
        build_field(cfg.field)
    except (ConfigError, FieldError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "analyze":
        return cmd_analyze(cfg)
    if args.command == "cycle":
        return cmd_cycle(cfg, args.lam)
    return cmd_sweep(cfg)


if __name__ == "__main__":
    sys.exit(main())

import json

import pytest

from lienard import cli, dynamics

VDP = {"family": "polynomial", "coeffs": [-1.0, 0.0, 1.0]}


def run(*argv):
    return cli.main([str(a) for a in argv])


def write_cfg(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"field": VDP, "out": str(tmp_path / "out"), **kw}))
    return p


def test_analyze_vdp(tmp_path):
    assert run("analyze", "--config", write_cfg(tmp_path)) == 0
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    assert doc["rho"] == pytest.approx(2.0, abs=1e-10)
    assert doc["report"]["x_star"] == pytest.approx(3 ** 0.5)
    assert doc["report"]["r_star"] == pytest.approx(4.0)
    assert (tmp_path / "out" / "m1.csv").exists()


def test_analyze_gauss_d2(tmp_path):
    out = tmp_path / "g"
    assert run("analyze", "--field", '{"family": "gauss", "a": 0.5}', "--out", out) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["report"]["uniqueness"]["D2"]["holds"]


def test_analyze_bad_parameter(tmp_path):
    assert run("analyze", "--field", '{"family": "exp", "b": 2}', "--out", tmp_path) == 2


def test_analyze_hypothesis_failure(tmp_path):
    assert run("analyze", "--field", '{"family": "polynomial", "coeffs": [1, 0, 1]}', "--out", tmp_path) == 1


@pytest.mark.parametrize("bad", [{"lambdas": [0.1, -1]}, {"tolerances": {"root": 0}}, {"colour": 1},
                                 {"formats": ["png"]}])
def test_config_errors(tmp_path, bad):
    assert run("analyze", "--config", write_cfg(tmp_path, **bad)) == 2


def test_missing_field(tmp_path):
    assert run("analyze", "--out", tmp_path) == 2


def test_cycle_outputs(tmp_path):
    assert run("cycle", "--config", write_cfg(tmp_path), "--lambda", 0.1) == 0
    out = tmp_path / "out"
    doc = json.loads((out / "cycle_0.1.json").read_text())
    assert doc["d_hausdorff_circle"] < 0.1
    assert doc["region"]["contains_cycle"] and doc["region"]["inward_flow"]
    assert doc["bendixson"]
    assert (out / "cycle_0.1.csv").exists() and (out / "overlay_0.1.svg").exists()


def test_cycle_large_lambda(tmp_path):
    assert run("cycle", "--config", write_cfg(tmp_path), "--lambda", 20, "--formats", "json") == 0
    doc = json.loads((tmp_path / "out" / "cycle_20.0.json").read_text())
    assert doc["d_hausdorff_gamma0"] < 0.1


def test_cycle_rejects_zero_lambda(tmp_path):
    assert run("cycle", "--config", write_cfg(tmp_path), "--lambda", 0) == 2


def test_sweep_single_lambda(tmp_path):
    assert run("sweep", "--config", write_cfg(tmp_path), "--lambdas", "0.2") == 0
    asym = json.loads((tmp_path / "out" / "asymptotics.json").read_text())
    assert asym["small_lambda_circle"]["verdict"] == "insufficient-data"
    lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert len(lines) == 2


def test_sweep_isolates_failures(tmp_path, monkeypatch):
    real = dynamics.find_limit_cycle

    def flaky(fld, lam, *a, **kw):
        if lam == 0.3:
            raise dynamics.DynamicsError("synthetic failure")
        return real(fld, lam, *a, **kw)

    monkeypatch.setattr(dynamics, "find_limit_cycle", flaky)
    assert run("sweep", "--config", write_cfg(tmp_path), "--lambdas", "0.2,0.3,0.4") == 0
    rows = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[1:]
    status = [r.rsplit(",", 1)[1] for r in rows]
    assert status[0] == "ok" and status[2] == "ok"
    assert status[1].startswith("failed")
    assert json.loads((tmp_path / "out" / "asymptotics.json").read_text())["failed"] == [0.3]


def test_render(tmp_path, capsys):
    assert run("cycle", "--config", write_cfg(tmp_path), "--lambda", 0.2, "--formats", "csv") == 0
    csv = tmp_path / "out" / "cycle_0.2.csv"
    svg = tmp_path / "o.svg"
    assert run("render", csv, csv, "-o", svg) == 0
    assert "warning" in capsys.readouterr().err
    assert svg.read_text().count("<path") == 2
    assert run("render", "-o", svg) == 2
    assert run("render", tmp_path / "missing.csv", "-o", svg) == 2


def test_heuristic_x0_grows_until_cycle_fits(vdp, vdp_report):
    c = dynamics.find_limit_cycle(vdp, 0.5, report=vdp_report, rho=2.0)
    flags, x0 = cli._contain(vdp, [(0.5, c)], 1.0, fixed=False)
    assert flags == [True] and x0 > 2.0
    flags, x0 = cli._contain(vdp, [(0.5, c)], 1.0, fixed=True)
    assert flags == [False] and x0 == 1.0

import json
import math

import numpy as np
import pytest

from lienard import export


def test_fmt_round_trip():
    for v in (0.1, 1 / 3, 2.0, -1e-300, 123456789.123):
        assert float(export.fmt(v)) == v
    assert export.fmt(True) == "true"
    assert export.fmt(None) == ""
    assert export.fmt(np.int64(3)) == "3"


def test_json_nan_to_null():
    txt = export.dumps_json({"a": float("nan"), "b": [np.float64(1.5), np.inf], "c": np.bool_(True)})
    assert json.loads(txt) == {"a": None, "b": [1.5, None], "c": True}


def test_csv_line_endings(tmp_path):
    p = export.write_csv(tmp_path / "a.csv", ["x", "y"], [[1.0, 2.0], [0.1, None]])
    assert p.read_bytes() == b"x,y\n1.0,2.0\n0.1,\n"


def test_curve_csv_round_trip(tmp_path):
    pts = np.random.default_rng(1).normal(size=(20, 2))
    p = export.write_curve_csv(tmp_path / "c.csv", pts, np.arange(20.0))
    assert np.array_equal(export.read_curve_csv(p), pts)


@pytest.mark.parametrize("body", ["", "a,b\n1,2\n", "x,y\n1,zz\n", "x,y\n1,nan\n"])
def test_curve_csv_malformed(tmp_path, body):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(ValueError):
        export.read_curve_csv(p)


def test_svg_basic():
    t = np.linspace(0, 2 * math.pi, 50)
    svg = export.svg_text([("circle <r>", np.column_stack([np.cos(t), np.sin(t)]), True)], title="t")
    assert svg.startswith('<?xml version="1.0"')
    assert 'version="1.1"' in svg
    assert "circle &lt;r&gt;" in svg
    assert svg.count("<path") == 1

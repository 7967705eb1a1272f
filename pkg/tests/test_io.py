import json

import numpy as np
import pytest

from beltrami.errors import GridError
from beltrami.grid import Grid, ScalarFieldGrid, VectorFieldGrid
from beltrami.io import REPORT_SCHEMA, read_bfg1, report_json, write_bfg1, write_report, write_vtk


def _fields(coords="cartesian"):
    lo = (0.5, 0.0, 0.0) if coords != "cartesian" else (-0.3, 0.1, 0.0)
    g = Grid.box(lo, (1.5, 1.0, 2.0), (6, 5, 7), coords)
    rng = np.random.default_rng(3)
    return ScalarFieldGrid(g, rng.normal(size=g.dims)), VectorFieldGrid(g, rng.normal(size=(3,) + g.dims) * 1e-7)


@pytest.mark.parametrize("coords", ["cartesian", "cylindrical_rz"])
def test_bfg1_round_trip_is_bitwise(tmp_path, coords):
    s, v = _fields(coords)
    for fld in (s, v):
        p = tmp_path / "f.bfg1"
        write_bfg1(p, fld)
        back = read_bfg1(p)
        assert type(back) is type(fld)
        assert back.grid == fld.grid
        assert np.array_equal(back.values, fld.values)


def test_bfg1_node_order_is_x_fastest(tmp_path):
    g = Grid((0, 0, 0), (1, 1, 1), (5, 5, 5))
    X, Y, Z = g.mesh()
    write_bfg1(tmp_path / "a.bfg1", ScalarFieldGrid(g, X + 10 * Y + 100 * Z))
    lines = (tmp_path / "a.bfg1").read_text().splitlines()
    assert lines[:6] == ["bfg1", "coords cartesian", "origin 0 0 0", "spacing 1 1 1", "dims 5 5 5", "kind scalar"]
    assert [float(v) for v in lines[6:13]] == [0, 1, 2, 3, 4, 10, 11]


@pytest.mark.parametrize(
    "text",
    [
        "grid\n",
        "bfg1\ncoords cartesian\norigin 0 0 0\nspacing 1 1 1\ndims 5 5 5\nkind scalar\n1\n2\n",
        "bfg1\ncoords cartesian\norigin 0 0\nspacing 1 1 1\ndims 1 1 1\nkind scalar\n1\n",
        "bfg1\ncoords cartesian\norigin 0 0 0\nspacing 1 1 1\ndims 5 5 5\nkind tensor\n" + "1\n" * 125,
    ],
)
def test_malformed_bfg1(tmp_path, text):
    p = tmp_path / "bad.bfg1"
    p.write_text(text)
    with pytest.raises(GridError):
        read_bfg1(p)


def test_vtk_layout(tmp_path):
    s, v = _fields()
    write_vtk(tmp_path / "o.vtk", {"f": s, "u": v}, title="demo")
    lines = (tmp_path / "o.vtk").read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0" and lines[1] == "demo"
    assert lines[2:5] == ["ASCII", "DATASET STRUCTURED_POINTS", "DIMENSIONS 6 5 7"]
    assert lines[7] == "POINT_DATA 210"
    assert lines[8] == "SCALARS f double 1" and lines[9] == "LOOKUP_TABLE default"
    assert lines[220] == "VECTORS u double"
    assert len(lines) == 221 + 210
    other = ScalarFieldGrid(Grid.box((0, 0, 0), (1, 1, 1), (6, 5, 7)), np.zeros((6, 5, 7)))
    with pytest.raises(GridError):
        write_vtk(tmp_path / "x.vtk", {"f": s, "g": other})


def test_reports_are_deterministic(tmp_path):
    payload = {"b": np.float64(0.1), "a": [np.int64(3), np.bool_(True)], "bad": float("nan"), "inf": np.inf}
    text = report_json(payload)
    assert text == report_json(dict(reversed(list(payload.items()))))
    body = json.loads(text)
    assert body["schema"] == REPORT_SCHEMA
    assert body["a"] == [3, True] and body["b"] == 0.1
    assert body["bad"] == "nan" and body["inf"] == "inf"
    write_report(tmp_path / "r.json", payload)
    assert (tmp_path / "r.json").read_text() == text

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fresnel_qdf.errors import ParameterError
from fresnel_qdf.fields import (
    ComplexField,
    PhaseGrid,
    QuadratureSpec,
    default_quadrature,
    field_to_csv,
    read_field,
    write_field,
)


def test_grid_parse_and_axes():
    g = PhaseGrid.parse("-4,4,81,-2, 2,41")
    assert g.shape == (81, 41)
    assert g.qs[0] == -4 and g.qs[-1] == 4 and g.ps[20] == 0
    q, p = g.mesh()
    assert q[3, 0] == g.qs[3] and p[0, 5] == g.ps[5]
    np.testing.assert_allclose(g.alphas(), (q + 1j * p) / np.sqrt(2))


@pytest.mark.parametrize("text", ["1,2,3", "-1,1,5,1,-1,5", "0,1,0,0,1,3", "a,1,2,0,1,2", "0,1,1,0,1,3"])
def test_grid_rejects(text):
    with pytest.raises(ParameterError):
        PhaseGrid.parse(text)


def test_grid_single_point():
    g = PhaseGrid(0.0, 0.0, 1, 0.5, 0.5, 1)
    assert g.shape == (1, 1) and g.ps[0] == 0.5


def test_quad_validation():
    QuadratureSpec.parse("12,201,96,1e-10")
    for text in ["0,201,64,1e-10", "12,200,64,1e-10", "12,31,64,1e-10", "12,201,4,1e-10", "12,201,64,0.5", "x,1,2,3", "1,2"]:
        with pytest.raises(ParameterError):
            QuadratureSpec.parse(text)


def test_quad_nodes_are_trapezoid():
    u, w = QuadratureSpec(3.0, 61, 16).nodes()
    assert u[30] == 0.0
    assert np.sum(w) == pytest.approx(6.0)
    assert np.sum(w * u**2) == pytest.approx(18.0, rel=1e-3)


def test_default_quadrature():
    q = default_quadrature(2.0)
    assert (q.half_width, q.points, q.fock_dim, q.tail_tol) == (12.0, 201, 64, 1e-10)
    # vacuum characteristic e^{-(u^2+v^2)/4} at the box corner
    L = default_quadrature(0).half_width
    assert np.exp(-(2 * L**2) / 4) <= np.exp(-32) * (1 + 1e-12)


def _field(values, grid, **kw):
    return ComplexField(np.asarray(values), grid, "trace", **kw)


def test_csv_layout():
    g = PhaseGrid(-1, 1, 2, 0, 3, 2)
    f = _field([[1 + 2j, 3 - 4j], [5j, -6]], g)
    lines = field_to_csv(f).splitlines()
    assert lines[0] == "q,p,re,im"
    assert lines[1] == "-1.00000000000e+00,0.00000000000e+00,1.00000000000e+00,2.00000000000e+00"
    assert lines[2].startswith("-1.00000000000e+00,3.00000000000e+00")
    real = field_to_csv(_field(np.ones((2, 2)), g)).splitlines()
    assert real[0] == "q,p,value" and len(real[1].split(",")) == 3


def test_shape_mismatch():
    with pytest.raises(ParameterError):
        _field(np.zeros((3, 2)), PhaseGrid.square(1, 2))


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)


@given(pairs=st.lists(st.tuples(finite, finite), min_size=6, max_size=6))
def test_csv_roundtrip_is_canonical(pairs, tmp_path_factory):
    g = PhaseGrid(-1.5, 2.0, 3, -0.25, 0.75, 2)
    vals = np.array([complex(a, b) for a, b in pairs]).reshape(3, 2)
    path = tmp_path_factory.mktemp("f") / "f.csv"
    write_field(_field(vals, g), path)
    back = read_field(path)
    assert back.grid == g
    # parse(emit(x)) is a fixed point of emit
    assert field_to_csv(back) == field_to_csv(_field(vals, g))
    np.testing.assert_allclose(back.values, vals, rtol=1e-11, atol=1e-300)


def test_sidecar_contents(tmp_path):
    g = PhaseGrid.square(1, 3)
    quad = QuadratureSpec(10, 101, 32)
    f = _field(np.zeros((3, 3), complex), g, quad=quad, state={"kind": "fock", "n": 1}, notes=["edge"])
    side = write_field(f, tmp_path / "x.csv", extra={"manifest": {"command": "compute"}})
    d = json.loads(side.read_text())
    assert d["provenance"] == "trace" and d["quadrature"]["fock_dim"] == 32 and d["manifest"]["command"] == "compute"
    back = read_field(tmp_path / "x.csv")
    assert back.quad == quad and back.state == {"kind": "fock", "n": 1} and back.notes == ["edge"]


def test_write_leaves_no_temp_files(tmp_path):
    write_field(_field(np.zeros((2, 2)), PhaseGrid.square(1, 2)), tmp_path / "sub" / "a.csv")
    assert sorted(p.name for p in (tmp_path / "sub").iterdir()) == ["a.csv", "a.json"]


def test_read_rejects_unknown_header(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ParameterError):
        read_field(tmp_path / "bad.csv")

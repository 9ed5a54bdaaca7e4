import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fresnel_qdf import frft
from fresnel_qdf.errors import OrderError, ParameterError

GRID = frft.SignalGrid.symmetric(8.0, 512)
# orders bounded away from multiples of pi
orders = st.floats(0.15, math.pi - 0.15) | st.floats(-math.pi + 0.15, -0.15)


def _bump(grid, shift=0.7, k=0.4):
    x = grid.xs
    return frft.SampledSignal(np.exp(-((x - shift) ** 2) / 2 + 1j * k * x), grid)


def test_grid_validation():
    with pytest.raises(ParameterError):
        frft.SignalGrid(-1.0, 0.1, 4)
    with pytest.raises(ParameterError):
        frft.SignalGrid(-1.0, 0.1, 30)  # not symmetric
    with pytest.raises(ParameterError):
        frft.SignalGrid(-1.0, -0.1, 21)
    assert GRID.step == pytest.approx(16 / 511)


def test_kernel_quarter_turn():
    k = frft.kernel(0.3, 1.1, math.pi / 2)
    expected = cmath.exp(1j * math.pi / 4) / cmath.sqrt(2j * math.pi) * cmath.exp(-1j * 0.33)
    assert k == pytest.approx(expected, abs=1e-15)
    assert abs(k) == pytest.approx(0.3989422804014327, abs=1e-15)


def test_kernel_at_origin():
    ref = cmath.sqrt(cmath.exp(1j * math.pi / 4) / math.sin(math.pi / 4)) / cmath.sqrt(2j * math.pi)
    assert frft.kernel(0, 0, math.pi / 4) == pytest.approx(ref, abs=1e-15)


@given(st.floats(-5, 5), st.floats(-5, 5), orders)
def test_kernel_modulus_is_constant(x, xp, w):
    assert abs(frft.kernel(x, xp, w)) == pytest.approx(abs(frft.kernel(0, 0, w)), rel=1e-12)


@pytest.mark.parametrize("w", [0.0, math.pi, -2 * math.pi, 1e-7, math.pi + 5e-7, math.nan])
def test_singular_orders_rejected(w):
    with pytest.raises(OrderError):
        frft.kernel(0, 0, w)
    with pytest.raises(OrderError):
        frft.delta_roundtrip_check(0.0, w, GRID)


def test_hermite_gauss_values():
    assert frft.hermite_gauss(0, GRID).samples[0] == pytest.approx(math.pi**-0.25 * math.exp(-32))
    g = frft.SignalGrid.symmetric(8.0, 513)
    assert frft.hermite_gauss(0, g).samples[256] == pytest.approx(0.751125544464942482858, abs=1e-15)
    assert frft.hermite_gauss(1, g).samples[256] == 0
    assert abs(frft.hermite_gauss(2, GRID).inner(frft.hermite_gauss(3, GRID))) < 1e-8
    for n in (0, 5, 12):
        assert frft.hermite_gauss(n, GRID).norm() == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ParameterError):
        frft.hermite_gauss(21, GRID)


def test_ground_gaussian_is_eigenfunction():
    for w in (0.3, math.pi / 3, 2.5):
        g0 = frft.hermite_gauss(0, GRID)
        phi0 = frft.global_phase(w, GRID)
        out = frft.apply(g0, w)
        assert np.max(np.abs(out.samples - np.exp(1j * phi0) * g0.samples)) < 1e-6


def test_principal_branches_leave_no_global_phase():
    # with principal square roots the kernel is exactly exp(-i w n) for |w| < pi
    for w in (0.3, 1.2, 2.9, -1.0):
        assert abs(frft.global_phase(w, GRID)) < 1e-10


@given(st.integers(0, 4), orders)
def test_eigenrelation(n, w):
    hg = frft.hermite_gauss(n, GRID)
    phi0 = frft.global_phase(w, GRID)
    out = frft.apply(hg, w)
    assert np.max(np.abs(out.samples - np.exp(1j * (phi0 - n * w)) * hg.samples)) < 1e-5


@given(orders, st.floats(-1.5, 1.5), st.floats(-1, 1))
def test_inverse_roundtrip(w, shift, k):
    s = _bump(GRID, shift, k)
    back = frft.apply(frft.apply(s, w), -w)
    assert np.max(np.abs(back.samples - s.samples)) < 1e-5


@given(orders)
def test_parseval(w):
    s = _bump(GRID)
    assert frft.apply(s, w).norm() == pytest.approx(s.norm(), abs=1e-6)


@given(st.floats(0.3, 1.2), st.floats(0.3, 1.2))
def test_order_additivity(w1, w2):
    s = _bump(GRID, 0.5, 0.3)
    two = frft.apply(frft.apply(s, w1), w2)
    one = frft.apply(s, w1 + w2)
    ratio = np.vdot(one.samples, two.samples)
    phase = ratio / abs(ratio)
    assert np.max(np.abs(two.samples - phase * one.samples)) < 1e-4


def test_quarter_turn_is_fourier_quadrature():
    s = _bump(GRID)
    x = GRID.xs
    direct = (GRID.weights() * s.samples) @ np.exp(-1j * np.outer(x, x)) / math.sqrt(2 * math.pi)
    const = frft.prefactor(math.pi / 2) * math.sqrt(2 * math.pi)
    assert abs(abs(const) - 1) < 1e-15
    assert np.max(np.abs(frft.apply(s, math.pi / 2).samples - const * direct)) < 1e-8


def test_gaussian_is_self_fourier():
    g0 = frft.hermite_gauss(0, GRID)
    out = frft.apply(g0, math.pi / 2)
    assert np.max(np.abs(out.samples - g0.samples)) < 1e-6


@pytest.mark.parametrize("y,w", [(0.0, math.pi / 3), (2.0, math.pi / 2), (-5.0, 2.4), (7.0, 0.2)])
def test_delta_roundtrip(y, w):
    assert frft.delta_roundtrip_check(y, w, GRID) < 1e-4


def test_delta_clipped_by_edge_warns():
    # a delta within 4 sigma of the edge is truncated before any transform
    with pytest.warns(frft.EdgeDecayWarning):
        frft.delta_roundtrip_check(7.9, 1.0, GRID)


def test_delta_roundtrip_rejects_point_outside():
    with pytest.raises(ParameterError):
        frft.delta_roundtrip_check(9.0, 1.0, GRID)


def test_mollified_delta_has_unit_area():
    d = frft.mollified_delta(1.0, GRID)
    assert np.sum(GRID.weights() * d.samples).real == pytest.approx(1.0, abs=1e-12)


def test_edge_warning():
    wide = frft.SampledSignal(np.ones(GRID.count), GRID)
    with pytest.warns(frft.EdgeDecayWarning):
        frft.apply(wide, 1.0)


def test_output_grid_option():
    out_grid = frft.SignalGrid.symmetric(4.0, 101)
    out = frft.apply(_bump(GRID), 0.8, out_grid=out_grid)
    assert out.grid == out_grid and out.samples.shape == (101,)


def test_fixed_summation_order_is_reproducible():
    s = _bump(GRID)
    a, b = frft.apply(s, 0.9), frft.apply(s, 0.9)
    assert np.array_equal(a.samples, b.samples)


def test_csv_roundtrip(tmp_path):
    s = frft.apply(frft.hermite_gauss(2, GRID), 0.4)
    frft.write_signal(s, tmp_path / "s.csv")
    text = (tmp_path / "s.csv").read_text()
    assert text.splitlines()[0] == "x,re,im"
    back = frft.read_signal(tmp_path / "s.csv")
    assert back.grid.count == GRID.count
    assert frft.signal_to_csv(back) == text


def test_csv_rejects_bad_input():
    with pytest.raises(ParameterError):
        frft.parse_signal("t,re,im\n" + "0,0,0\n" * 10)
    rows = "".join(f"{x},0,0\n" for x in [-3, -2, -1, 0, 1, 2, 3.5, 4, 5])
    with pytest.raises(ParameterError):
        frft.parse_signal("x,re,im\n" + rows)

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fresnel_qdf import closedform as cf
from fresnel_qdf import fock, qdf
from fresnel_qdf.errors import DegenerateStateError, ParameterError
from fresnel_qdf.fields import ComplexField, PhaseGrid, QuadratureSpec
from fresnel_qdf.fock import PhasePoint

from .conftest import CAT_AMP, rho_of

ORIGIN = PhasePoint(0.0, 0.0)
QUAD = QuadratureSpec(12.0, 201, 96)
small = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)
coords = st.floats(-3, 3)


# --- J for number states ------------------------------------------------------


def test_j_fock_vacuum_origin():
    assert cf.j_fock(0, ORIGIN) == pytest.approx(0.226509175225145103 - 0.144200219571000471j, abs=1e-15)


@pytest.mark.parametrize("n", [0, 1, 4, 9, 50])
def test_j_fock_origin_modulus(n):
    val = cf.j_fock(n, ORIGIN)
    assert abs(val) == pytest.approx(1 / math.sqrt(4 + math.pi**2), abs=1e-14)
    assert abs(val) == pytest.approx(0.26851, abs=1e-5)
    assert val == pytest.approx(cmath.exp(1j * qdf.theta() * n) / (math.pi + 2j), abs=1e-14)


def test_j_fock_frozen_values():
    # mpmath at 30 digits
    assert cf.j_fock(3, 1.0, 0.5) == pytest.approx(-0.0562968852395224537 + 0.0150072296708946010j, abs=1e-15)
    r = math.sqrt(2.5)
    assert cf.j_fock(5, r, 0.0) == pytest.approx(-0.00125264234866056750 - 0.00303794860177371974j, abs=1e-15)


@given(st.floats(0, 4), st.floats(0, 2 * math.pi))
def test_j_fock_is_radial(r, phi):
    assert cf.j_fock(3, r * math.cos(phi), r * math.sin(phi)) == pytest.approx(cf.j_fock(3, r, 0.0), abs=1e-13)


def test_j_fock_broadcasts():
    g = PhaseGrid.square(2.0, 5)
    q, p = g.mesh()
    field = cf.j_fock(2, q, p)
    assert field.shape == (5, 5)
    assert field[1, 3] == cf.j_fock(2, PhasePoint(g.qs[1], g.ps[3]))


def test_degree_guard():
    with pytest.raises(ParameterError):
        cf.j_fock(101, ORIGIN)
    with pytest.raises(ParameterError):
        cf.kirkwood_fock(-1, ORIGIN)
    with pytest.raises(TypeError):
        cf.j_fock(1, 0.5)


@pytest.mark.parametrize("n", range(9))
def test_j_fock_matches_trace_route(n):
    rho = rho_of(fock.fock_state(n, 64))
    grid = PhaseGrid.square(3.0, 7)
    traced = qdf.grid_eval("j_trace", rho, grid, QuadratureSpec(12.0, 201, 64)).values
    q, p = grid.mesh()
    assert np.max(np.abs(traced - cf.j_fock(n, q, p))) < 1e-8


# --- Kirkwood for number states -------------------------------------------------


def test_kirkwood_fock_values():
    assert cf.kirkwood_fock(0, ORIGIN) == pytest.approx(1 / (math.sqrt(2) * math.pi), abs=1e-15)
    assert cf.kirkwood_fock(0, ORIGIN).real == pytest.approx(0.22508, abs=1e-5)
    assert cf.kirkwood_fock(1, ORIGIN) == 0
    by_hand = 1j**3 / (48 * math.pi * math.sqrt(2)) * cmath.exp(-1 + 1j) * (-4) * (-4)
    assert cf.kirkwood_fock(3, 1.0, 1.0) == pytest.approx(by_hand, abs=1e-15)
    assert cf.kirkwood_fock(3, 1.0, 1.0) == pytest.approx(0.0232251505731718170 - 0.0149126976869966121j, abs=1e-15)


def test_kirkwood_fock_zero_lines():
    # H_2 vanishes at +-1/sqrt2, so K_2 vanishes on those lines in q and in p
    x = 1 / math.sqrt(2)
    for t in np.linspace(-3, 3, 7):
        assert abs(cf.kirkwood_fock(2, x, t)) < 1e-15
        assert abs(cf.kirkwood_fock(2, t, -x)) < 1e-15


def test_kirkwood_fock_large_degree_is_finite():
    val = cf.kirkwood_fock(100, 2.0, -1.5)
    assert np.isfinite(val)


@pytest.mark.parametrize("n", [0, 2, 4, 6, 8])
def test_kirkwood_fock_matches_integral_even(n):
    rho = rho_of(fock.fock_state(n, 96))
    for q in np.linspace(-3, 3, 7):
        for p in (-2.0, 0.5, 3.0):
            pt = PhasePoint(float(q), p)
            assert abs(qdf.kirkwood_integral(rho, pt, QUAD) - cf.kirkwood_fock(n, pt)) < 1e-4


@pytest.mark.xfail(strict=True, reason="closed form is the expectation-value Kirkwood; the defining integral is its conjugate times e^{2iqp}, which flips the sign for odd n")
@pytest.mark.parametrize("n", [1, 3])
def test_kirkwood_fock_matches_integral_odd(n):
    rho = rho_of(fock.fock_state(n, 96))
    pt = PhasePoint(1.0, 1.0)
    assert abs(qdf.kirkwood_integral(rho, pt, QUAD) - cf.kirkwood_fock(n, pt)) < 1e-4


@pytest.mark.parametrize("n", range(6))
def test_kirkwood_fock_equals_expectation_form(n):
    psi = fock.fock_state(n, 96)
    for pt in (ORIGIN, PhasePoint(1.0, 1.0), PhasePoint(-0.5, 1.5)):
        assert abs(qdf.kirkwood_expectation(psi, pt) - cf.kirkwood_fock(n, pt)) < 1e-10


@pytest.mark.parametrize("n", range(6))
def test_integral_is_conjugate_of_closed_form(n):
    rho = rho_of(fock.fock_state(n, 96))
    for pt in (PhasePoint(1.0, 1.0), PhasePoint(-0.5, 1.5)):
        mapped = np.conj(cf.kirkwood_fock(n, pt)) * cmath.exp(2j * pt.q * pt.p)
        assert abs(qdf.kirkwood_integral(rho, pt, QUAD) - mapped) < 1e-10


# --- cats -----------------------------------------------------------------------


def test_catspec_validation():
    with pytest.raises(DegenerateStateError):
        cf.CatSpec(0.7 + 0.2j, 0.7 + 0.2j, -1)
    with pytest.raises(ParameterError):
        cf.CatSpec(1.0, -1.0, 2)
    spec = cf.CatSpec(CAT_AMP, -CAT_AMP, 1)
    assert (spec.q1, spec.q2, spec.p1, spec.p2) == pytest.approx((4.0, -4.0, 0.0, 0.0))
    assert spec.denominator == pytest.approx(2 + 2 * math.exp(-16), abs=1e-15)


@given(small, coords, coords)
def test_j_cat_single_lobe(z, q, p):
    spec = cf.CatSpec(z, z, 1)
    qz, pz = math.sqrt(2) * z.real, math.sqrt(2) * z.imag
    lobe = cmath.exp(-math.pi * ((q - qz) ** 2 + (p - pz) ** 2) / (2j + math.pi)) / (2j + math.pi)
    assert cf.j_cat(spec, q, p) == pytest.approx(lobe, abs=1e-12)


def test_coherent_j_matches_trace():
    z = 1 + 0.5j
    rho = rho_of(fock.coherent_state(z, 96))
    for pt in (ORIGIN, PhasePoint(1.0, 0.5), PhasePoint(-2.0, 1.0)):
        assert abs(qdf.j_trace(rho, pt, QUAD) - cf.j_cat(cf.CatSpec(z, z, 1), pt)) < 1e-8


@given(small, small, st.sampled_from([1, -1]), coords, coords)
def test_j_cat_matches_trace_route(a1, a2, sign, q, p):
    try:
        spec = cf.CatSpec(a1, a2, sign)
    except DegenerateStateError:
        return
    if spec.denominator < 1e-3:
        return
    rho = rho_of(fock.cat_state(a1, a2, sign, 64))
    quad = QuadratureSpec(12.0, 201, 64)
    assert abs(qdf.j_trace(rho, PhasePoint(q, p), quad) - cf.j_cat(spec, q, p)) < 1e-8


@pytest.mark.parametrize("sign", [1, -1])
def test_wide_cat_point_reflection(sign):
    spec = cf.CatSpec(CAT_AMP, -CAT_AMP, sign)
    g = PhaseGrid.square(4.0, 21)  # far lobe stays inside 96 levels
    q, p = g.mesh()
    closed = cf.j_cat(spec, q, p)
    assert np.max(np.abs(closed - closed[::-1, ::-1])) < 1e-12
    # the brute-force route shows the same symmetry
    traced = qdf.grid_eval("j_trace", rho_of(fock.cat_state(CAT_AMP, -CAT_AMP, sign, 96)), g, QUAD).values
    assert np.max(np.abs(traced - traced[::-1, ::-1])) < 1e-8
    assert np.max(np.abs(traced - closed)) < 1e-8


@pytest.mark.parametrize("sign", [1, -1])
def test_wide_cat_origin_matches_trace(sign):
    rho = rho_of(fock.cat_state(CAT_AMP, -CAT_AMP, sign, 96))
    assert abs(qdf.j_trace(rho, ORIGIN, QUAD) - cf.j_cat(cf.CatSpec(CAT_AMP, -CAT_AMP, sign), ORIGIN)) < 1e-6


@pytest.mark.parametrize("sign", [1, -1])
def test_wide_cat_normalization(sign):
    g = PhaseGrid.square(8.0, 161)
    q, p = g.mesh()
    f = ComplexField(cf.j_cat(cf.CatSpec(CAT_AMP, -CAT_AMP, sign), q, p), g, "closed-form")
    assert abs(qdf.field_integral(f) - 1) < 5e-3


@given(small, small, st.sampled_from([1, -1]), coords, coords)
def test_kirkwood_cat_swap_invariance(a1, a2, sign, q, p):
    try:
        spec = cf.CatSpec(a1, a2, sign)
    except DegenerateStateError:
        return
    assert cf.kirkwood_cat(spec.swapped(), q, p) == pytest.approx(cf.kirkwood_cat(spec, q, p), abs=1e-12)


@given(small, small, st.sampled_from([1, -1]), coords, coords)
def test_kirkwood_cat_equals_expectation_form(a1, a2, sign, q, p):
    try:
        spec = cf.CatSpec(a1, a2, sign)
    except DegenerateStateError:
        return
    if spec.denominator < 1e-3:
        return
    psi = fock.cat_state(a1, a2, sign, 96)
    assert abs(qdf.kirkwood_expectation(psi, PhasePoint(q, p)) - cf.kirkwood_cat(spec, q, p)) < 1e-8


def test_kirkwood_cat_single_state_reduction():
    z = 1 + 0.5j
    spec = cf.CatSpec(z, z, 1)
    for pt in (ORIGIN, PhasePoint(1.0, 0.5), PhasePoint(-2.0, 1.0)):
        ref = qdf.kirkwood_expectation(fock.coherent_state(z, 96), pt)
        assert abs(cf.kirkwood_cat(spec, pt) - ref) < 1e-12


def test_kirkwood_cat_vacuum_reduces_to_fock():
    spec = cf.CatSpec(0, 0, 1)
    assert cf.kirkwood_cat(spec, 0.3, -1.1) == pytest.approx(cf.kirkwood_fock(0, 0.3, -1.1), abs=1e-15)


def test_coherent_kirkwood_integral_at_origin():
    z = 1 + 0.5j
    rho = rho_of(fock.coherent_state(z, 96))
    assert abs(qdf.kirkwood_integral(rho, ORIGIN, QUAD) - cf.kirkwood_cat(cf.CatSpec(z, z, 1), ORIGIN)) < 1e-4


@pytest.mark.xfail(strict=True, reason="integral Kirkwood is conj(expectation form) e^{2iqp}; they differ off the origin for complex amplitudes")
def test_coherent_kirkwood_integral_off_origin():
    z = 1 + 0.5j
    rho = rho_of(fock.coherent_state(z, 96))
    pt = PhasePoint(1.0, 0.5)
    assert abs(qdf.kirkwood_integral(rho, pt, QUAD) - cf.kirkwood_cat(cf.CatSpec(z, z, 1), pt)) < 1e-4


def test_wide_even_cat_kirkwood_matches_integral():
    rho = rho_of(fock.cat_state(CAT_AMP, -CAT_AMP, 1, 120))
    quad = QuadratureSpec(14.0, 201, 120)
    spec = cf.CatSpec(CAT_AMP, -CAT_AMP, 1)
    for pt in (ORIGIN, PhasePoint(1.0, 0.5), PhasePoint(-2.0, 1.5)):
        assert abs(qdf.kirkwood_integral(rho, pt, quad) - cf.kirkwood_cat(spec, pt)) < 1e-4

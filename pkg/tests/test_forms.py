import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodeglue.complex_algebra import Polynomial, RationalFunction
from nodeglue.errors import AmbiguousPoleError, PathThroughPoleError
from nodeglue.forms import (
    INFINITY,
    Circle,
    MeromorphicForm,
    Polyline,
    Segment,
    all_residues,
    arc_polyline,
    circle_period,
    circle_period_quadrature,
    path_integral,
    residue_at,
    residue_at_infinity_by_inversion,
    vertical_flux,
)
from nodeglue.gluing import build_components, central_configuration

DZ_OVER_Z = MeromorphicForm(RationalFunction(Polynomial([1]), Polynomial([0, 1])))
Z_DZ = MeromorphicForm(RationalFunction(Polynomial([0, 1]), Polynomial([1])))
DZ = MeromorphicForm(RationalFunction(Polynomial([1]), Polynomial([1])))
UNIT = Circle(0, 1)


def central(m):
    return build_components(central_configuration(m))


def test_residue_of_dz_over_z():
    assert residue_at(DZ_OVER_Z, 0) == pytest.approx(1)
    assert residue_at(DZ_OVER_Z, 1) == 0
    assert residue_at(DZ_OVER_Z, INFINITY) == pytest.approx(-1)


def test_residue_at_infinity_central_plus_m3():
    # oracle: minus the sum of the gammas, each 1/(m-1)
    assert residue_at(central(3).phi3_plus, INFINITY) == pytest.approx(-1.5, abs=1e-12)


def test_residue_at_infinity_central_minus_m3():
    # oracle: sum of c plus sum of gammas = -1 + 3/2
    assert residue_at(central(3).phi3_minus, INFINITY) == pytest.approx(0.5, abs=1e-12)


def test_residue_of_double_pole_laurent_coefficient():
    # (1 + 3z)/z^2 has Laurent coefficient 3 at z^-1
    w = MeromorphicForm(RationalFunction(Polynomial([1, 3]), Polynomial([0, 0, 1])))
    assert residue_at(w, 0) == pytest.approx(3)


def test_ambiguous_point_rejected():
    w = MeromorphicForm(RationalFunction(Polynomial([1]), Polynomial.from_roots([0.0, 1.5e-8])))
    assert len(w.poles) == 2
    with pytest.raises(AmbiguousPoleError):
        residue_at(w, 0.75e-8)


def test_circle_periods():
    assert circle_period(DZ_OVER_Z, UNIT) == pytest.approx(2j * math.pi)
    assert circle_period(Z_DZ, UNIT) == 0
    q, _ = circle_period_quadrature(Z_DZ, UNIT)
    assert abs(q) < 1e-12


def test_circle_period_central_neck_m3():
    w = central(3).phi3_plus
    c = Circle(cmath.exp(-2j * math.pi / 3), 0.1)
    assert circle_period(w, c) == pytest.approx(1j * math.pi, abs=1e-12)
    q, _ = circle_period_quadrature(w, c)
    assert q == pytest.approx(1j * math.pi, abs=1e-9)


def test_circle_through_pole_rejected():
    with pytest.raises(PathThroughPoleError):
        circle_period(DZ_OVER_Z, Circle(1, 1.0))


def test_segment_integral_of_dz():
    assert path_integral(DZ, Segment(0, 1 + 1j)) == pytest.approx(1 + 1j, abs=1e-12)


def test_semicircle_integral_of_dz_over_z():
    path = Polyline(tuple(arc_polyline(0, 1, -math.pi / 2, math.pi / 2, max_step=1e-3)))
    # polyline chord error is second order in the step
    assert path_integral(DZ_OVER_Z, path) == pytest.approx(1j * math.pi, abs=1e-6)


def test_plus_side_b_integral_m2():
    comps = central(2)
    w = MeromorphicForm(comps.phi3_plus.density * comps.g_plus.reciprocal())
    # phi3_plus / g_plus is exactly dz at central values
    val = path_integral(w, Segment(1, -1))
    assert val == pytest.approx(-2, abs=1e-12)


def test_vertical_flux():
    assert vertical_flux(DZ_OVER_Z, UNIT) == pytest.approx(2 * math.pi)
    assert vertical_flux(central(3).phi3_plus, Circle(cmath.exp(-2j * math.pi / 3), 0.1)) == pytest.approx(math.pi)
    assert vertical_flux(Z_DZ, UNIT) == 0


def random_form(seed):
    rng = np.random.default_rng(seed)
    dn = int(rng.integers(0, 8))
    dd = int(rng.integers(1, 9))
    num = Polynomial(rng.normal(size=dn + 1) + 1j * rng.normal(size=dn + 1))
    poles = rng.uniform(-2, 2, dd) + 1j * rng.uniform(-2, 2, dd)
    return MeromorphicForm(RationalFunction(num, Polynomial.from_roots(poles)))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**7))
def test_residue_theorem(seed):
    w = random_form(seed)
    res = all_residues(w)
    scale = max(1.0, max(abs(r) for r in res.values()))
    assert abs(sum(res.values())) <= 1e-10 * scale
    assert res[INFINITY] == pytest.approx(residue_at_infinity_by_inversion(w), abs=1e-9 * scale)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**7))
def test_period_by_residues_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    w = random_form(seed)
    circle = Circle(complex(*rng.uniform(-1, 1, 2)), float(rng.uniform(0.5, 2.0)))
    if min(circle.distance_to(p) for p in w.poles) < 0.1:
        return
    exact = circle_period(w, circle)
    quad, _ = circle_period_quadrature(w, circle)
    assert abs(exact - quad) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**7))
def test_path_additivity(seed):
    rng = np.random.default_rng(seed)
    w = MeromorphicForm.simple_poles(list(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)), list(rng.normal(size=3)))
    a, b, c = 3 + 0j, 3 + 3j, -3 + 3j
    whole = path_integral(w, Polyline((a, b, c)))
    parts = path_integral(w, Segment(a, b)) + path_integral(w, Segment(b, c))
    assert abs(whole - parts) <= 1e-10

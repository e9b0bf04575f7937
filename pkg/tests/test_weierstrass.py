import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodeglue.complex_algebra import Polynomial, RationalFunction
from nodeglue.errors import PathThroughPoleError
from nodeglue.forms import MeromorphicForm, Polyline
from nodeglue.gluing import central_configuration, build_components, limit_graph
from nodeglue.weierstrass import (
    AnnularGrid,
    GraphData,
    PeriodObstructionWarning,
    RectGrid,
    SurfaceMesh,
    WeierstrassData,
    catenoid,
    compatibility_report,
    dimension_audit,
    gauss_curvature,
    immerse,
    immerse_closed_form,
    mesh_surface,
    phi12_from,
)

CAT = catenoid()


def sample_points(n=20, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.3, 3, n) * np.exp(2j * np.pi * rng.uniform(size=n))


def test_phi12_for_catenoid():
    phi1, phi2 = phi12_from(RationalFunction.identity(), CAT.height_differential)
    z = sample_points()
    assert np.allclose(phi1(z), 0.5 * (1 / z**2 - 1), rtol=1e-12)
    assert np.allclose(phi2(z), 0.5j * (1 / z**2 + 1), rtol=1e-12)


def test_phi1_vanishes_for_constant_gauss_map():
    phi1, _ = phi12_from(RationalFunction.constant(1.0), CAT.height_differential)
    assert phi1.density.is_zero() or np.allclose(phi1(sample_points()), 0)


def test_scaled_plus_side_phi1_limit():
    # on the plus sphere the Gauss map is 1/(t g+) and phi3 = g+ dz
    gp = build_components(central_configuration(3)).g_plus
    z = np.array([2.0 + 0.5j, -1.7j, 0.3 + 0.1j])
    for t in (1e-3, 1e-5):
        phi1, _ = phi12_from((gp * t).reciprocal(), MeromorphicForm(gp))
        assert np.allclose(t * phi1(z), -0.5, atol=10 * t * t * np.abs(gp(z)).max() ** 2 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_conformality(seed):
    rng = np.random.default_rng(seed)
    g = RationalFunction(Polynomial(rng.normal(size=3) + 1j * rng.normal(size=3)), Polynomial.from_roots(rng.normal(size=2)))
    phi3 = MeromorphicForm.simple_poles(list(rng.normal(size=3) + 1j * rng.normal(size=3)), list(rng.normal(size=3)))
    phi1, phi2 = phi12_from(g, phi3)
    z = sample_points(20, seed % 101)
    s = phi1(z) ** 2 + phi2(z) ** 2 + phi3(z) ** 2
    scale = np.abs(phi3(z)) ** 2 * (np.abs(g(z)) + 1 / np.abs(g(z))) ** 2
    assert np.all(np.abs(s) <= 1e-9 * scale)


def test_catenoid_immersion_examples():
    assert np.allclose(immerse(CAT, 1.0), 0)
    x = immerse(CAT, 2.0)
    assert x[2] == pytest.approx(math.log(2), abs=1e-10)
    for th in np.linspace(0.3, 6.0, 7):
        x = immerse(CAT, np.exp(1j * th))
        assert x[2] == pytest.approx(0, abs=1e-10)
        # base point 1 puts the unit waist circle around (1, 0)
        assert (x[0] - 1) ** 2 + x[1] ** 2 == pytest.approx(1, abs=1e-9)


def test_immerse_matches_closed_form():
    for z in sample_points(8, 3):
        assert np.allclose(immerse(CAT, z), immerse_closed_form(CAT, z), atol=1e-9)


def test_path_independence_around_the_puncture():
    upper = Polyline((1, 1 + 1j, -1 + 1j, -1))
    lower = Polyline((1, 1 - 1j, -1 - 1j, -1))
    assert np.allclose(immerse(CAT, -1, path=upper), immerse(CAT, -1, path=lower), atol=1e-8)


def test_immerse_at_puncture_rejected():
    with pytest.raises(PathThroughPoleError):
        immerse(CAT, 0.01)


def test_non_real_residue_warns():
    data = WeierstrassData(RationalFunction.identity(), MeromorphicForm.simple_poles([0.0], [1j]), (0j, "infinity"))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        immerse(data, 2.0)
    assert any(issubclass(w.category, PeriodObstructionWarning) for w in rec)


def test_harmonic_coordinates():
    z0 = 1.3 + 0.4j
    lap = []
    for h in (2e-2, 1e-2):
        vals = [immerse_closed_form(CAT, z0 + d) for d in (0, h, -h, 1j * h, -1j * h)]
        lap.append(np.abs(vals[1] + vals[2] + vals[3] + vals[4] - 4 * vals[0]).max() / h**2)
    # the discrete Laplacian of a harmonic function is O(h^2)
    assert lap[1] < 1e-3
    assert lap[0] / max(lap[1], 1e-15) > 3


def test_curvature_examples():
    assert gauss_curvature(CAT, 1.0) == pytest.approx(-1, abs=1e-12)
    assert gauss_curvature(CAT, 1j) == pytest.approx(-1, abs=1e-12)
    assert gauss_curvature(catenoid(radius=0.5), 1.0) == pytest.approx(-4, abs=1e-12)
    flat = WeierstrassData(RationalFunction.constant(2.0), CAT.height_differential, (0j, "infinity"))
    assert gauss_curvature(flat, 1.5) == 0


def test_catenoid_curvature_profile():
    for r in np.geomspace(0.2, 5, 25):
        z = r * np.exp(0.7j)
        assert gauss_curvature(CAT, z) == pytest.approx(-1 / math.cosh(math.log(r)) ** 4, abs=1e-9)


def test_catenoid_is_compatible():
    assert compatibility_report(CAT).ok


def test_incompatible_data_reported():
    # phi3 = dz has a double pole at infinity, not a simple one
    data = WeierstrassData(RationalFunction.identity(), MeromorphicForm(RationalFunction.constant(1.0)), ("infinity",))
    rep = compatibility_report(data)
    assert not rep.ok and rep.issues


def test_mesh_catenoid_annulus():
    mesh = mesh_surface(CAT, AnnularGrid(0.5, 2.0, 32, 32))
    assert 0.999 <= np.abs(mesh.gauss_curvature).max() <= 1.001
    assert mesh.faces.shape == (2 * 31 * 32, 3)
    # vertices agree with pointwise immersion
    pts = AnnularGrid(0.5, 2.0, 32, 32).points().ravel()
    for k in (0, 100, 517, 1023):
        assert np.allclose(mesh.vertices[k], immerse_closed_form(CAT, pts[k]), atol=1e-9)


def test_two_by_two_grid_has_two_faces():
    grid = RectGrid(1.0, 2.0, 1.0, 2.0, 2, 2)
    assert len(grid.faces()) == 2
    assert mesh_surface(CAT, grid).faces.shape == (2, 3)
    with pytest.raises(ValueError):
        RectGrid(1, 2, 1, 2, 1, 2).points()


def test_mesh_of_limit_graph():
    cfg = central_configuration(3)
    graph = GraphData(lambda z: limit_graph(cfg, "plus", z), tuple(cfg.p_plus))
    grid = AnnularGrid(1.3, 3.0, 8, 24)
    mesh = mesh_surface(graph, grid)
    z = grid.points().ravel()
    oracle = np.log(np.abs(z**3 - 1)) / 2
    assert np.allclose(mesh.height, oracle, atol=1e-9)


def test_mesh_is_deterministic():
    a = mesh_surface(CAT, AnnularGrid(0.7, 1.5, 6, 12))
    b = mesh_surface(CAT, AnnularGrid(0.7, 1.5, 6, 12))
    assert np.array_equal(a.vertices, b.vertices)


def test_mesh_validation():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
    with pytest.raises(ValueError):
        SurfaceMesh(v, [(0, 1, 3)], np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        SurfaceMesh(v, [(0, 1, 1)], np.zeros(3), np.zeros(3))


def test_dimension_audit():
    assert dimension_audit(0, 2) == (1, 0, 1)
    assert dimension_audit(1, 3) == (9, 7, 2)
    # kernel is parameters minus equations, n - 1 = 2
    assert dimension_audit(0, 3) == (4, 2, 2)


@given(st.integers(0, 20), st.integers(2, 30))
def test_dimension_audit_counts(G, n):
    p, e, k = dimension_audit(G, n)
    assert p - e == k

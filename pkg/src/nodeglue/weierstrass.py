"""Weierstrass data on the sphere: immersion, curvature, meshing.

Scaling convention: the catenoid of waist radius r has Gauss map g = z and
height differential r dz/z, so its top end has logarithmic growth r.  The
normalized form used throughout the gluing code is r = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .complex_algebra import Polynomial, RationalFunction, partial_fractions, poly_roots
from .errors import PathThroughPoleError, SingularPointError
from .forms import (
    DEFAULT_EPSILON,
    INFINITY,
    MeromorphicForm,
    Polyline,
    Segment,
    all_residues,
    integrate_callable,
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


class PeriodObstructionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WeierstrassData:
    gauss_map: RationalFunction
    height_differential: MeromorphicForm
    punctures: tuple
    base_point: complex = 1.0
    scale: float = 1.0  # multiply coordinates by this to get user units

    def forms(self) -> tuple[MeromorphicForm, MeromorphicForm, MeromorphicForm]:
        phi1, phi2 = phi12_from(self.gauss_map, self.height_differential)
        return phi1, phi2, self.height_differential

    def pole_set(self) -> list[complex]:
        out: list[complex] = []
        for w in self.forms():
            for p in w.poles:
                if all(abs(p - q) > 1e-12 for q in out):
                    out.append(p)
        return out


def catenoid(radius: float = 1.0, base_point: complex = 1.0) -> WeierstrassData:
    """Catenoid with waist `radius`: g = z, phi3 = radius dz/z."""
    g = RationalFunction.identity()
    phi3 = MeromorphicForm.simple_poles([0.0], [radius])
    return WeierstrassData(g, phi3, (0j, INFINITY), complex(base_point))


def phi12_from(g: RationalFunction, phi3: MeromorphicForm) -> tuple[MeromorphicForm, MeromorphicForm]:
    if g.is_zero():
        raise ValueError("Gauss map must not vanish identically")
    ginv = g.reciprocal()
    phi1 = MeromorphicForm(phi3.density * (ginv - g) * 0.5)
    phi2 = MeromorphicForm(phi3.density * (ginv + g) * 0.5j)
    return phi1, phi2


# --------------------------------------------------------------------------
# zero/pole compatibility


def _order_at(f: RationalFunction, point) -> int:
    """Order of the function f at a point (positive = zero, negative = pole)."""
    if isinstance(point, str):
        return f.denominator.degree - f.numerator.degree
    order = 0
    tol = 1e-7 * (1 + abs(point))
    if f.numerator.degree >= 1:
        for z, k in poly_roots(f.numerator):
            if abs(z - point) <= tol:
                order += k
    for z, k in f.poles:
        if abs(z - point) <= tol:
            order -= k
    return order


@dataclass
class CompatibilityReport:
    ok: bool
    issues: list = field(default_factory=list)


def compatibility_report(data: WeierstrassData) -> CompatibilityReport:
    """Check the zero/pole equation, puncture poles and end alternation."""
    issues = []
    h = data.height_differential.density
    g = data.gauss_map
    zeros = []
    if h.numerator.degree >= 1:
        zeros = [(z, k) for z, k in poly_roots(h.numerator)]
    inf_order = data.height_differential.order_at_infinity()
    if inf_order > 0:
        zeros.append((INFINITY, inf_order))
    for z, k in zeros:
        og = _order_at(g, z)
        if abs(og) != k:
            issues.append(f"phi3 zero of order {k} at {z} but g has order {og}")
    punct = list(data.punctures)
    for p in h.pole_locations:
        if not any(not isinstance(q, str) and abs(q - p) < 1e-9 for q in punct):
            issues.append(f"phi3 has a pole at {p} which is not a puncture")
    signs = []
    for q in punct:
        if isinstance(q, str):
            ordh = data.height_differential.order_at_infinity()
        else:
            ordh = -max((k for z, k in h.poles if abs(z - q) < 1e-9), default=0)
        if ordh != -1:
            issues.append(f"phi3 is not simply polar at puncture {q}")
        og = _order_at(g, q)
        if abs(og) != 1:
            issues.append(f"g does not take 0 or infinity simply at puncture {q}")
        signs.append(np.sign(og))
    if any(a == b for a, b in zip(signs[:-1], signs[1:])):
        issues.append("g does not alternate between 0 and infinity at the punctures")
    return CompatibilityReport(not issues, issues)


# --------------------------------------------------------------------------
# immersion


def _default_path(start: complex, end: complex, poles: Sequence[complex], margin: float):
    seg = Segment(start, end)
    if all(seg.distance_to(p) >= margin for p in poles):
        return seg
    mid = 0.5 * (start + end)
    d = end - start
    normal = 1j * d / abs(d) if d != 0 else 1.0
    for k in (0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        path = Polyline((start, mid + k * abs(d) * normal + 0j, end))
        if all(path.distance_to(p) >= margin for p in poles):
            return path
    raise PathThroughPoleError(f"no pole-avoiding path from {start} to {end}")


def _check_real_residues(data: WeierstrassData, tol: float = 1e-9):
    for name, w in zip(("phi1", "phi2", "phi3"), data.forms()):
        for p, r in all_residues(w).items():
            if abs(r.imag) > tol * (1 + abs(r)):
                warnings.warn(
                    f"{name} has non-real residue {r} at {p}; the immersion is not well defined",
                    PeriodObstructionWarning,
                    stacklevel=3,
                )


def immerse(data: WeierstrassData, z: complex, path=None, pole_margin: float | None = None, method: str = "adaptive") -> np.ndarray:
    """Re of the integral of (phi1, phi2, phi3) from the base point to z."""
    margin = DEFAULT_EPSILON / 2 if pole_margin is None else pole_margin
    z = complex(z)
    _check_real_residues(data)
    poles = data.pole_set()
    for p in data.punctures:
        if not isinstance(p, str) and abs(p - z) < margin:
            raise PathThroughPoleError(f"{z} is at a puncture")
    if path is None:
        if z == data.base_point:
            return np.zeros(3)
        path = _default_path(data.base_point, z, poles, margin)
    else:
        for p in poles:
            if path.distance_to(p) < margin:
                raise PathThroughPoleError(f"path passes near pole {p}")
    out = np.zeros(3)
    for k, w in enumerate(data.forms()):
        out[k] = integrate_callable(w.density, path, method=method)[0].real
    return out * data.scale


def immerse_closed_form(data: WeierstrassData, z: complex) -> np.ndarray:
    """Same map through exact primitives from partial fractions.

    Only valid when every residue is real (logs then enter through log|.|).
    """
    out = np.zeros(3)
    for k, w in enumerate(data.forms()):
        terms, poly = partial_fractions(w.density)

        def prim(x, terms=terms, poly=poly):
            c = poly.coefficients
            val = sum(c[j] * x ** (j + 1) / (j + 1) for j in range(c.size))
            re = 0.0
            for t in terms:
                re += t.coefficients[0].real * math.log(abs(x - t.pole))
                for j, cj in enumerate(t.coefficients[1:], start=2):
                    val += cj * (x - t.pole) ** (1 - j) / (1 - j)
            return complex(val).real + re

        out[k] = prim(complex(z)) - prim(data.base_point)
    return out * data.scale


# --------------------------------------------------------------------------
# curvature


def gauss_curvature(data: WeierstrassData, z: complex) -> float:
    """K = -(4 |g'/g| / ((|g| + 1/|g|)^2 |phi3 density|))^2.

    Evaluated through the reduced rational functions g' g / h and
    g' / (g^3 h), so zeros of phi3 compensated by zeros or poles of g give
    the limiting value rather than 0 * inf.
    """
    z = complex(z)
    g = data.gauss_map
    h = data.height_differential.density
    dg = g.derivative()
    if dg.is_zero():
        return 0.0
    gz = g(z) if not any(abs(z - p) < 1e-12 for p in g.pole_locations) else np.inf
    if np.isfinite(gz) and abs(gz) <= 1.0:
        b = dg * g / h
        G = abs(gz)
    else:
        b = dg / (g * g * g * h)
        G = 0.0 if not np.isfinite(gz) else 1.0 / abs(gz)
    if any(abs(z - p) < 1e-12 for p in b.pole_locations) or any(
        abs(z - p) < 1e-12 for p in h.pole_locations
    ):
        raise SingularPointError(f"conformal factor is singular at {z}")
    k = 4.0 * abs(b(z)) / (1.0 + G * G) ** 2
    return -(k**2) / data.scale**2


# --------------------------------------------------------------------------
# meshing


@dataclass(frozen=True)
class AnnularGrid:
    r_min: float
    r_max: float
    n_r: int
    n_theta: int
    center: complex = 0j
    spacing: str = "linear"

    def points(self) -> np.ndarray:
        if self.n_r < 2 or self.n_theta < 3:
            raise ValueError("annular grid needs n_r >= 2 and n_theta >= 3")
        if self.spacing == "log":
            r = np.exp(np.linspace(math.log(self.r_min), math.log(self.r_max), self.n_r))
        else:
            r = np.linspace(self.r_min, self.r_max, self.n_r)
        th = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        return self.center + r[:, None] * np.exp(1j * th[None, :])

    def faces(self) -> list[tuple[int, int, int]]:
        nt = self.n_theta
        out = []
        for i in range(self.n_r - 1):
            for j in range(nt):
                a, b = i * nt + j, i * nt + (j + 1) % nt
                c, d = a + nt, b + nt
                out += [(a, b, d), (a, d, c)]
        return out


@dataclass(frozen=True)
class RectGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def points(self) -> np.ndarray:
        if self.nx < 2 or self.ny < 2:
            raise ValueError("rectangular grid needs at least 2 x 2 samples")
        x = np.linspace(self.x_min, self.x_max, self.nx)
        y = np.linspace(self.y_min, self.y_max, self.ny)
        return x[None, :] + 1j * y[:, None]

    def faces(self) -> list[tuple[int, int, int]]:
        out = []
        for i in range(self.ny - 1):
            for j in range(self.nx - 1):
                a = i * self.nx + j
                b, c, d = a + 1, a + self.nx, a + self.nx + 1
                out += [(a, b, d), (a, d, c)]
        return out


@dataclass(frozen=True)
class GraphData:
    """A graph x3 = height(x1 + i x2) over the plane, with its singularities."""

    height: Callable[[complex], float]
    singularities: tuple = ()


@dataclass
class SurfaceMesh:
    vertices: np.ndarray
    faces: np.ndarray
    gauss_curvature: np.ndarray
    height: np.ndarray

    def __post_init__(self):
        self.faces = np.asarray(self.faces, dtype=int).reshape(-1, 3)
        nv = len(self.vertices)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= nv):
            raise ValueError("face references a missing vertex")
        span = np.ptp(self.vertices, axis=0) if nv else np.zeros(3)
        bbox2 = float(np.dot(span, span))
        v = self.vertices
        for f in self.faces:
            area = 0.5 * np.linalg.norm(np.cross(v[f[1]] - v[f[0]], v[f[2]] - v[f[0]]))
            if area <= 1e-14 * bbox2:
                raise ValueError(f"degenerate face {tuple(f)}")


def _segment_integrals(forms, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Re of the integrals of each form along each straight segment."""
    s = 0.5 * (_GL_NODES + 1.0)
    d = ends - starts
    pts = starts[:, None] + d[:, None] * s[None, :]
    out = np.zeros((len(starts), 3))
    for k, w in enumerate(forms):
        vals = w.density(pts)
        out[:, k] = (0.5 * (vals * _GL_WEIGHTS[None, :]).sum(axis=1) * d).real
    return out


def mesh_surface(data, grid, pole_margin: float | None = None) -> SurfaceMesh:
    """Sample a surface on a grid in the parameter plane.

    `data` is WeierstrassData (immersion) or GraphData (graph of a height
    function).  Vertex order is row-major in the grid (rings for an annular
    grid), independent of evaluation order.
    """
    margin = DEFAULT_EPSILON / 2 if pole_margin is None else pole_margin
    pts = grid.points()
    flat = pts.ravel()
    faces = grid.faces()
    if isinstance(data, GraphData):
        for s in data.singularities:
            if np.min(np.abs(flat - s)) < margin:
                raise PathThroughPoleError(f"grid passes within {margin} of singularity {s}")
        hts = np.array([data.height(z) for z in flat])
        verts = np.column_stack([flat.real, flat.imag, hts])
        curv = np.array([_graph_curvature(data.height, z) for z in flat])
        return SurfaceMesh(verts, faces, curv, hts)

    forms = data.forms()
    poles = data.pole_set()
    # spanning tree of segments: along each row, and down the first column
    rows, cols = pts.shape
    starts, ends = [], []
    for i in range(rows):
        if i > 0:
            starts.append(pts[i - 1, 0])
            ends.append(pts[i, 0])
        for j in range(1, cols):
            starts.append(pts[i, j - 1])
            ends.append(pts[i, j])
    starts, ends = np.array(starts), np.array(ends)
    for p in poles:
        for a, b in zip(starts, ends):
            if Segment(a, b).distance_to(p) < margin:
                raise PathThroughPoleError(f"grid edge {a}->{b} passes near pole {p}")
    incr = _segment_integrals(forms, starts, ends)
    x = np.zeros((rows, cols, 3))
    x[0, 0] = immerse(data, pts[0, 0], pole_margin=margin) / data.scale
    k = 0
    for i in range(rows):
        if i > 0:
            x[i, 0] = x[i - 1, 0] + incr[k]
            k += 1
        for j in range(1, cols):
            x[i, j] = x[i, j - 1] + incr[k]
            k += 1
    verts = x.reshape(-1, 3) * data.scale
    curv = np.array([gauss_curvature(data, z) for z in flat])
    return SurfaceMesh(verts, faces, curv, verts[:, 2].copy())


def _graph_curvature(u: Callable[[complex], float], z: complex, h: float = 1e-4) -> float:
    f = lambda dx, dy: u(z + dx + 1j * dy)
    u0 = f(0, 0)
    ux = (f(h, 0) - f(-h, 0)) / (2 * h)
    uy = (f(0, h) - f(0, -h)) / (2 * h)
    uxx = (f(h, 0) - 2 * u0 + f(-h, 0)) / h**2
    uyy = (f(0, h) - 2 * u0 + f(0, -h)) / h**2
    uxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    return (uxx * uyy - uxy**2) / (1 + ux**2 + uy**2) ** 2


def dimension_audit(G: int, n: int) -> tuple[int, int, int]:
    """(parameters, equations, expected kernel) for genus G with n ends."""
    if G < 0 or n < 2:
        raise ValueError("need G >= 0 and n >= 2")
    return 5 * G + 3 * n - 5, 5 * G + 2 * n - 4, n - 1

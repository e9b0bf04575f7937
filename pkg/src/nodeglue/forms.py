"""Meromorphic 1-forms f(z) dz on the Riemann sphere.

Residues (including the point at infinity) are computed algebraically from
partial fractions.  Quadrature along circles, segments and polylines is the
independent cross-check; it never feeds back into residue values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .complex_algebra import (
    Polynomial,
    RationalFunction,
    partial_fractions,
    rational_reduce,
)
from .errors import AmbiguousPoleError, PathThroughPoleError

INFINITY = "infinity"
DEFAULT_EPSILON = 0.1
QUAD_ABS_TOL = 1e-10
QUAD_MAX_SUBINTERVALS = 2**16

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


# --------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float
    orientation: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("circle radius must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def pieces(self):
        c, r, o = complex(self.center), self.radius, self.orientation

        def z(s):
            return c + r * np.exp(1j * o * 2 * np.pi * s)

        def dz(s):
            return 1j * o * 2 * np.pi * r * np.exp(1j * o * 2 * np.pi * s)

        return [(z, dz)]

    def distance_to(self, w: complex) -> float:
        return abs(abs(w - self.center) - self.radius)

    def winding_number(self, w: complex) -> int:
        return self.orientation if abs(w - self.center) < self.radius else 0


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    def pieces(self):
        a, b = complex(self.start), complex(self.end)
        return [(lambda s, a=a, b=b: a + (b - a) * np.asarray(s), lambda s, a=a, b=b: (b - a) + 0 * np.asarray(s))]

    def distance_to(self, w: complex) -> float:
        return _segment_distance(complex(self.start), complex(self.end), w)


@dataclass(frozen=True)
class Polyline:
    vertices: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))
        if len(self.vertices) < 2:
            raise ValueError("a polyline needs at least two vertices")

    def segments(self) -> list[Segment]:
        return [Segment(a, b) for a, b in zip(self.vertices[:-1], self.vertices[1:])]

    def pieces(self):
        out = []
        for s in self.segments():
            out.extend(s.pieces())
        return out

    def distance_to(self, w: complex) -> float:
        return min(s.distance_to(w) for s in self.segments())


PathSpec = Circle | Segment | Polyline


def _segment_distance(a: complex, b: complex, w: complex) -> float:
    d = b - a
    if d == 0:
        return abs(w - a)
    s = ((w - a) * d.conjugate()).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(w - (a + s * d))


def arc_polyline(center: complex, radius: float, theta0: float, theta1: float, max_step: float = math.pi / 16) -> list[complex]:
    n = max(1, int(math.ceil(abs(theta1 - theta0) / max_step)))
    return [center + radius * np.exp(1j * (theta0 + (theta1 - theta0) * k / n)) for k in range(n + 1)]


# --------------------------------------------------------------------------
# forms


class MeromorphicForm:
    """The 1-form density(z) dz in the standard chart of the sphere."""

    __slots__ = ("density",)

    def __init__(self, density: RationalFunction):
        self.density = density

    @classmethod
    def simple_poles(cls, poles, residues, constant=0.0) -> "MeromorphicForm":
        return cls(RationalFunction.from_simple_poles(poles, residues, constant))

    def __call__(self, z):
        return self.density(z)

    def __mul__(self, other: RationalFunction | complex) -> "MeromorphicForm":
        return MeromorphicForm(self.density * other)

    __rmul__ = __mul__

    def __add__(self, other: "MeromorphicForm") -> "MeromorphicForm":
        return MeromorphicForm(self.density + other.density)

    def __neg__(self):
        return MeromorphicForm(-self.density)

    @property
    def poles(self) -> list[complex]:
        return self.density.pole_locations

    def order_at_infinity(self) -> int:
        """Order of the form at infinity (negative for a pole)."""
        f = self.density
        if f.is_zero():
            return 10**9
        return f.denominator.degree - f.numerator.degree - 2

    def residue_at(self, point) -> complex:
        return residue_at(self, point)

    def residues(self) -> dict:
        return all_residues(self)


def residue_at(w: MeromorphicForm, point) -> complex:
    """Residue of `w` at a finite point or at ``INFINITY``."""
    f = w.density
    if isinstance(point, str):
        if point != INFINITY:
            raise ValueError(f"unknown point {point!r}")
        return _residue_at_infinity(f)
    point = complex(point)
    tol = f.cluster_tol()
    near = [p for p in f.pole_locations if abs(p - point) <= tol]
    if len(near) > 1:
        raise AmbiguousPoleError(f"{point} is within tolerance of poles {near}")
    if not near:
        return 0j
    terms, _ = partial_fractions(f)
    for t in terms:
        if abs(t.pole - point) <= tol:
            return complex(t.coefficients[0])
    return 0j


def _residue_at_infinity(f: RationalFunction) -> complex:
    # Res_inf f dz = -(coefficient of 1/z in the expansion of f at infinity)
    if f.is_zero():
        return 0j
    _, rem = divmod(f.numerator, f.denominator)
    dd = f.denominator.degree
    if dd == 0 or rem.is_zero() or rem.degree < dd - 1:
        return 0j
    return -complex(rem.coefficients[dd - 1]) / f.denominator.lead


def all_residues(w: MeromorphicForm) -> dict:
    terms, _ = partial_fractions(w.density)
    out = {t.pole: complex(t.coefficients[0]) for t in terms}
    out[INFINITY] = _residue_at_infinity(w.density)
    return out


def residue_at_infinity_by_inversion(w: MeromorphicForm) -> complex:
    """-(residue at 0 of zeta^-2 f(1/zeta)); independent route for tests."""
    f = w.density
    n, d = f.numerator, f.denominator
    rn = Polynomial(n.coefficients[::-1])
    rd = Polynomial(d.coefficients[::-1])
    # f(1/zeta) = zeta^(dd - dn) rn(zeta) / rd(zeta)
    shift = d.degree - n.degree - 2
    if shift >= 0:
        num, den = rn * Polynomial.monomial(shift), rd
    else:
        num, den = rn, rd * Polynomial.monomial(-shift)
    g = MeromorphicForm(rational_reduce(num, den))
    return -residue_at(g, 0.0)


# --------------------------------------------------------------------------
# integration


def _check_margin(w: MeromorphicForm, path, margin: float | None):
    if margin is None:
        margin = DEFAULT_EPSILON / 2
    for p in w.poles:
        d = path.distance_to(p)
        if d < margin:
            raise PathThroughPoleError(
                f"path passes within {d:.3g} of pole {p} (margin {margin:.3g})"
            )


def integrate_callable(
    f: Callable, path, method: str = "adaptive", abs_tol: float = QUAD_ABS_TOL
) -> tuple[complex, float]:
    """Integrate a pointwise-evaluable density along `path`.

    ``method="adaptive"`` uses globally adaptive Gauss-Kronrod with error
    control; ``method="gauss"`` uses a fixed composite 24-point
    Gauss-Legendre rule whose nodes depend smoothly on the path, which is
    what finite-difference Jacobians need.
    """
    total, err = 0j, 0.0
    for z, dz in path.pieces():
        if method == "adaptive":

            def integrand(s, z=z, dz=dz):
                v = f(z(s)) * dz(s)
                return np.array([v.real, v.imag])

            val, e = quad_vec(
                integrand, 0.0, 1.0, epsabs=abs_tol, epsrel=1e-13, limit=QUAD_MAX_SUBINTERVALS
            )
            total += complex(val[0], val[1])
            err += float(e)
        elif method == "gauss":
            pieces = 8 if isinstance(path, Circle) else 2
            for k in range(pieces):
                s = (k + 0.5 * (_GL_NODES + 1.0)) / pieces
                total += np.sum(_GL_WEIGHTS * f(z(s)) * dz(s)) * 0.5 / pieces
        else:
            raise ValueError(f"unknown quadrature method {method!r}")
    return total, err


def circle_period(w: MeromorphicForm, circle: Circle, pole_margin: float | None = None) -> complex:
    """Period over a circle: 2 pi i times the enclosed residues."""
    _check_margin(w, circle, pole_margin)
    res = all_residues(w)
    total = 0j
    for p, r in res.items():
        if p == INFINITY:
            continue
        total += circle.winding_number(p) * r
    return 2j * math.pi * total


def circle_period_quadrature(w: MeromorphicForm, circle: Circle, pole_margin: float | None = None) -> tuple[complex, float]:
    _check_margin(w, circle, pole_margin)
    return integrate_callable(w.density, circle)


def path_integral(w: MeromorphicForm, path, pole_margin: float | None = None, method: str = "adaptive") -> complex:
    _check_margin(w, path, pole_margin)
    val, _ = integrate_callable(w.density, path, method=method)
    return val


def vertical_flux(w_phi3: MeromorphicForm, cycle: Circle, pole_margin: float | None = None) -> float:
    """Imaginary part of the period of the height differential."""
    return circle_period(w_phi3, cycle, pole_margin).imag

"""Local polynomial models of deformed branched coverings.

Near a branch point of order k-1 with branching value q, a deformation of the
covering is modelled by h(z) = z^k + q + sum_{j<=k-2} a_j z^j.  Two marked
deformations are isomorphic exactly when their parameter vectors agree, while
unmarked coverings are compared through their branching profiles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .complex_algebra import Polynomial, RootSet, poly_roots
from .errors import InvalidActionError

ALPHA = 27 ** 0.25 * cmath.exp(1j * math.pi / 4)  # alpha^4 = -27
CUBE_ROOT_OF_UNITY = cmath.exp(2j * math.pi / 3)


@dataclass(frozen=True)
class CoveringLocalModel:
    k: int
    q: complex
    a: tuple  # a_0, ..., a_(k-2)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("local degree must be at least 2")
        a = tuple(complex(x) for x in self.a)
        if len(a) != self.k - 1:
            raise ValueError(f"need k - 1 = {self.k - 1} parameters")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "q", complex(self.q))

    @property
    def polynomial(self) -> Polynomial:
        c = np.zeros(self.k + 1, dtype=complex)
        c[: self.k - 1] = self.a
        c[0] += self.q
        c[self.k] = 1.0
        return Polynomial(c)

    def default_radius(self) -> float:
        return 0.25 * abs(self.q) if self.q != 0 else 0.25

    def admissible(self, radius: float | None = None) -> bool:
        r = self.default_radius() if radius is None else radius
        return all(abs(v - self.q) < r for v in branching_profile(self.polynomial).values)


def local_model_from_polynomial(p: Polynomial, q: complex = 0.0) -> CoveringLocalModel:
    """Rewrite a monic polynomial without its z^(k-1) term by a translation."""
    p = Polynomial(p.coefficients) if not isinstance(p, Polynomial) else p
    k = p.degree
    if abs(p.lead - 1) > 1e-14:
        raise ValueError("polynomial must be monic")
    shift = -p.coefficients[k - 1] / k
    # p(w + shift) expanded around w = 0
    c = p.taylor(shift, k + 1)
    c[k - 1] = 0.0
    a = list(c[: k - 1])
    a[0] -= q
    return CoveringLocalModel(k, q, tuple(a))


@dataclass(frozen=True)
class BranchingProfile:
    critical_points: RootSet
    values: tuple  # critical values, each repeated (local multiplicity - 1) times
    orders: tuple  # (branching order, critical value) per critical point

    @property
    def total_order(self) -> int:
        return sum(o for o, _ in self.orders)


def branching_profile(h: Polynomial) -> BranchingProfile:
    if h.degree < 2:
        raise ValueError("degree must be at least 2")
    crit = poly_roots(h.derivative())
    vals, orders = [], []
    for z, mu in crit:
        v = complex(h(z))
        vals += [v] * mu
        orders.append((mu, v))
    return BranchingProfile(crit, tuple(vals), tuple(orders))


def _match(u, v, tol, cost_extra=None) -> bool:
    if len(u) != len(v):
        return False
    if not u:
        return True
    cost = np.abs(np.subtract.outer(np.array(u), np.array(v)))
    if cost_extra is not None:
        cost = cost + cost_extra
    r, c = linear_sum_assignment(cost)
    return bool(cost[r, c].max() <= tol)


def same_branching_values(h1: Polynomial, h2: Polynomial, tol: float = 1e-10) -> bool:
    if h1.degree != h2.degree:
        raise ValueError("polynomials must have the same degree")
    return _match(list(branching_profile(h1).values), list(branching_profile(h2).values), tol)


def isomorphic_profiles(h1: Polynomial, h2: Polynomial, tol: float = 1e-9) -> bool:
    """Equal multisets of (branching order, value); necessary for isomorphic coverings."""
    if h1.degree != h2.degree:
        raise ValueError("polynomials must have the same degree")
    o1, o2 = branching_profile(h1).orders, branching_profile(h2).orders
    if len(o1) != len(o2):
        return False
    penalty = np.where(np.subtract.outer([o for o, _ in o1], [o for o, _ in o2]) != 0, np.inf, 0.0)
    return _match([v for _, v in o1], [v for _, v in o2], tol, penalty)


def marked_equal(m1: CoveringLocalModel, m2: CoveringLocalModel, tol: float = 1e-9) -> bool:
    if m1.k != m2.k or m1.q != m2.q:
        raise ValueError("models must share k and q")
    return bool(np.max(np.abs(np.subtract(m1.a, m2.a))) <= tol)


def marking_point(model: CoveringLocalModel, eps: float) -> complex:
    """Solution of h(z) = q + eps closest to eps^(1/k); ties go to the smallest argument."""
    p = model.polynomial - Polynomial([model.q + eps])
    sols = [z for z, mult in poly_roots(p) for _ in range(mult)]
    target = eps ** (1.0 / model.k)
    d = np.array([abs(z - target) for z in sols])
    best = d.min()
    ties = [z for z, dz in zip(sols, d) if dz <= best + 1e-12 * (1 + best)]
    return min(ties, key=lambda z: cmath.phase(z) % (2 * math.pi))


def symmetric_slice_check(models, sigma_action, tol: float = 1e-12) -> bool:
    """True iff a_(sigma(i)) = conj(a_i) for every model i."""
    s = list(sigma_action)
    if sorted(s) != list(range(len(models))):
        raise InvalidActionError("action is not a permutation of the models")
    if any(s[s[i]] != i for i in range(len(s))):
        raise InvalidActionError("action is not an involution")
    for i, j in enumerate(s):
        if models[i].k != models[j].k:
            raise InvalidActionError(f"models {i} and {j} have different local degrees")
    return all(
        np.max(np.abs(np.subtract(models[j].a, np.conj(models[i].a)))) <= tol for i, j in enumerate(s)
    )


def symmetric_functions_of_branching(model: CoveringLocalModel) -> np.ndarray:
    """Elementary symmetric functions e_1, ..., e_(k-1) of the branching values."""
    vals = branching_profile(model.polynomial).values
    c = np.poly(np.array(vals))  # 1, -e1, e2, -e3, ...
    return np.array([(-1) ** (r) * c[r] for r in range(1, len(c))])


def polynomial_fit_residual(model: CoveringLocalModel, j: int, half_width: float = 0.1, samples: int = 25) -> float:
    """Fit each e_r as a polynomial in a_j over a real grid; return the worst misfit.

    The degree used is the smaller of k(k-1) and samples - 2, so the fit is
    always overdetermined.
    """
    k = model.k
    deg = min(k * (k - 1), samples - 2)
    s = np.linspace(-1.0, 1.0, samples)
    rows = []
    for x in s:
        a = list(model.a)
        a[j] = model.a[j] + half_width * x
        rows.append(symmetric_functions_of_branching(CoveringLocalModel(k, model.q, tuple(a))))
    Y = np.array(rows)
    V = np.polynomial.legendre.legvander(s, deg)
    coef, *_ = np.linalg.lstsq(V, Y, rcond=None)
    return float(np.abs(V @ coef - Y).max())


def f_t(t: float) -> Polynomial:
    """z^4 + 4 t z^3: one branch point of order 2 and one simple one."""
    return Polynomial([0, 0, 0, 4 * t, 1])


def g_t(t: float) -> Polynomial:
    """z^4 + 4 t alpha z^3 + 4 t^2 alpha^2 z^2 with alpha^4 = -27: three simple branch points."""
    return Polynomial([0, 0, 4 * t * t * ALPHA**2, 4 * t * ALPHA, 1])

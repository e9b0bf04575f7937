"""Complex polynomials, rational functions and deterministic root finding.

Everything is double precision.  Polynomials store coefficients in
ascending degree.  Rational functions always carry the root set of their
denominator, so residues and partial fractions never have to rediscover
poles that were known when the function was assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    IllConditionedInputError,
    NumericFailureError,
)

ROOT_ITERATION_CAP = 500
_ZERO_SNAP = 1e-14


def _as_coeffs(coefficients) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coefficients, dtype=complex)).copy()
    if c.size == 0:
        c = np.zeros(1, dtype=complex)
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
    c.setflags(write=False)
    return c


class Polynomial:
    """Complex polynomial, coefficients in ascending degree."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        self.coefficients = _as_coeffs(coefficients)

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Polynomial":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "Polynomial":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = coeff
        return cls(c)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coefficients[-1])

    def is_zero(self) -> bool:
        return self.coefficients.size == 1 and self.coefficients[0] == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self.coefficients)))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z) + self.coefficients[-1]
        for c in self.coefficients[-2::-1]:
            out = out * z + c
        return out if out.ndim else complex(out)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0])
        k = np.arange(1, self.coefficients.size)
        return Polynomial(self.coefficients[1:] * k)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            raise DegenerateInputError("zero polynomial has no monic form")
        return Polynomial(self.coefficients / self.coefficients[-1])

    def __add__(self, other):
        other = _poly(other)
        n = max(self.coefficients.size, other.coefficients.size)
        c = np.zeros(n, dtype=complex)
        c[: self.coefficients.size] += self.coefficients
        c[: other.coefficients.size] += other.coefficients
        return Polynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.coefficients)

    def __sub__(self, other):
        return self + (-_poly(other))

    def __rsub__(self, other):
        return _poly(other) - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coefficients, other.coefficients))
        return Polynomial(self.coefficients * complex(other))

    __rmul__ = __mul__

    def __divmod__(self, other: "Polynomial"):
        other = _poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        num = self.coefficients.astype(complex).copy()
        den = other.coefficients
        dn, dd = num.size - 1, den.size - 1
        if dn < dd:
            return Polynomial([0]), Polynomial(num)
        q = np.zeros(dn - dd + 1, dtype=complex)
        for k in range(dn - dd, -1, -1):
            q[k] = num[k + dd] / den[-1]
            num[k : k + dd + 1] -= q[k] * den
        return Polynomial(q), Polynomial(num[:dd] if dd else [0])

    def deflate(self, root: complex) -> "Polynomial":
        """Quotient of synthetic division by (z - root); remainder dropped."""
        c = self.coefficients
        if c.size == 1:
            return Polynomial([0])
        q = np.zeros(c.size - 1, dtype=complex)
        acc = c[-1]
        for k in range(c.size - 2, -1, -1):
            q[k] = acc
            acc = c[k] + acc * root
        return Polynomial(q)

    def taylor(self, point: complex, count: int) -> np.ndarray:
        """First `count` Taylor coefficients at `point` (repeated Horner)."""
        c = self.coefficients.astype(complex).copy()
        out = np.zeros(count, dtype=complex)
        for j in range(count):
            if c.size == 0:
                break
            acc = 0j
            q = np.zeros(max(c.size - 1, 0), dtype=complex)
            for k in range(c.size - 1, -1, -1):
                acc = c[k] + acc * point
                if k > 0:
                    q[k - 1] = acc
            out[j] = acc
            c = q
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(
            self.coefficients, other.coefficients
        )

    def __hash__(self):
        return hash(self.coefficients.tobytes())

    def __repr__(self):
        return f"Polynomial({np.round(self.coefficients, 12).tolist()})"


def _poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial([x])


@dataclass(frozen=True)
class RootSet:
    """Distinct root locations with multiplicities, in canonical order."""

    locations: tuple
    multiplicities: tuple

    @classmethod
    def build(cls, pairs: Iterable[tuple[complex, int]]) -> "RootSet":
        pairs = [(_snap(complex(z)), int(k)) for z, k in pairs]
        pairs.sort(key=lambda p: _root_key(p[0]))
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def degree(self) -> int:
        return sum(self.multiplicities)

    def __len__(self):
        return len(self.locations)

    def __iter__(self):
        return iter(zip(self.locations, self.multiplicities))

    def expanded(self) -> list[complex]:
        out = []
        for z, k in self:
            out.extend([z] * k)
        return out

    def merged(self, other: "RootSet", tol: float) -> "RootSet":
        """Union with multiplicities added for locations within `tol`."""
        pairs = [[z, k] for z, k in self]
        for z, k in other:
            for p in pairs:
                if abs(p[0] - z) <= tol:
                    p[1] += k
                    break
            else:
                pairs.append([z, k])
        return RootSet.build(pairs)


def _snap(z: complex) -> complex:
    s = _ZERO_SNAP * (1.0 + abs(z))
    re = 0.0 if abs(z.real) <= s else z.real
    im = 0.0 if abs(z.imag) <= s else z.imag
    return complex(re, im)


def _root_key(z: complex):
    a = math.atan2(z.imag, z.real) % (2 * math.pi)
    if a > 2 * math.pi - 1e-12:
        a = 0.0
    return (round(a, 12), abs(z))


def default_cluster_tol(roots: Sequence[complex]) -> float:
    rmax = max((abs(r) for r in roots), default=0.0)
    return 1e-8 * (1.0 + rmax)


def _polish(p: Polynomial, dp: Polynomial, r: complex, budget: list) -> complex:
    best = abs(p(r))
    while budget[0] > 0:
        d = dp(r)
        if d == 0 or best == 0:
            break
        budget[0] -= 1
        cand = r - p(r) / d
        val = abs(p(cand))
        if val >= best:
            break
        r, best = cand, val
    return r


def poly_roots(p: Polynomial, cluster_tol: float | None = None) -> RootSet:
    """Roots of `p` with multiplicities inferred by clustering.

    Companion-matrix eigenvalues, Newton polishing (shared cap of
    ROOT_ITERATION_CAP steps), then single-linkage clustering at
    `cluster_tol` (default 1e-8 * (1 + max |root|)).  Exact zero trailing
    coefficients are peeled off first as an exact root at the origin.
    """
    p = _poly(p)
    if p.is_zero():
        raise DegenerateInputError("roots of the zero polynomial are undefined")
    if p.degree < 1:
        raise DegenerateInputError("constant polynomial has no roots")
    c = p.coefficients
    k0 = int(np.flatnonzero(c)[0])
    reduced = Polynomial(c[k0:])
    raw: list[complex] = []
    if reduced.degree >= 1:
        raw = [complex(z) for z in np.roots(reduced.coefficients[::-1])]
        dp = reduced.derivative()
        budget = [ROOT_ITERATION_CAP]
        raw = [_polish(reduced, dp, z, budget) for z in raw]
    tol = cluster_tol if cluster_tol is not None else default_cluster_tol(raw)

    # single-linkage clustering
    n = len(raw)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(raw[i] - raw[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(raw[i])
    pairs = [(sum(g) / len(g), len(g)) for g in groups.values()]
    if k0:
        merged = False
        for idx, (z, m) in enumerate(pairs):
            if abs(z) <= tol:
                pairs[idx] = (0j, m + k0)
                merged = True
        if not merged:
            pairs.append((0j, k0))

    scale = p.scale()
    worst = 0.0
    for z, _ in pairs:
        bound = 1e-9 * scale * (1.0 + abs(z)) ** p.degree
        res = abs(p(z))
        worst = max(worst, res / bound)
    if worst > 1.0:
        raise NumericFailureError(
            f"root residual exceeds acceptance bound by factor {worst:.3g}",
            best_residual=worst,
        )
    return RootSet.build(pairs)


class RationalFunction:
    """Quotient of complex polynomials with a known denominator root set.

    Instances built through :func:`rational_reduce` (and every arithmetic
    operation) are reduced: no numerator root lies within the clustering
    tolerance of a pole.
    """

    __slots__ = ("numerator", "denominator", "poles")

    def __init__(self, numerator, denominator=1.0, poles: RootSet | None = None):
        self.numerator = _poly(numerator)
        self.denominator = _poly(denominator)
        if self.denominator.is_zero():
            raise DegenerateInputError("denominator is the zero polynomial")
        if poles is None:
            poles = (
                poly_roots(self.denominator)
                if self.denominator.degree >= 1
                else RootSet((), ())
            )
        self.poles = poles

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value: complex) -> "RationalFunction":
        return cls(Polynomial([value]), Polynomial([1.0]), RootSet((), ()))

    @classmethod
    def identity(cls) -> "RationalFunction":
        return cls(Polynomial([0, 1]), Polynomial([1.0]), RootSet((), ()))

    @classmethod
    def from_poly(cls, p) -> "RationalFunction":
        return cls(_poly(p), Polynomial([1.0]), RootSet((), ()))

    @classmethod
    def from_simple_poles(
        cls, poles: Sequence[complex], residues: Sequence[complex], constant: complex = 0.0
    ) -> "RationalFunction":
        """sum_j residues[j] / (z - poles[j]) + constant, poles distinct."""
        poles = [complex(p) for p in poles]
        den = Polynomial.from_roots(poles)
        num = Polynomial([constant]) * den
        for j, (pj, rj) in enumerate(zip(poles, residues)):
            others = poles[:j] + poles[j + 1 :]
            num = num + Polynomial.from_roots(others, lead=complex(rj))
        return rational_reduce(num, den, RootSet.build([(p, 1) for p in poles]))

    # evaluation ------------------------------------------------------------
    def __call__(self, z):
        return self.numerator(z) / self.denominator(z)

    @property
    def pole_locations(self) -> list[complex]:
        return list(self.poles.locations)

    def cluster_tol(self) -> float:
        return default_cluster_tol(self.poles.locations)

    # arithmetic -------------------------------------------------------------
    def _monic_den_factor(self):
        return self.denominator.lead

    def __add__(self, other):
        other = _rat(other)
        tol = max(self.cluster_tol(), other.cluster_tol())
        lcm = _lcm_roots(self.poles, other.poles, tol)
        L = Polynomial.from_roots(lcm.expanded())
        f1 = _cofactor(lcm, self.poles, tol) * (1.0 / self.denominator.lead)
        f2 = _cofactor(lcm, other.poles, tol) * (1.0 / other.denominator.lead)
        num = self.numerator * f1 + other.numerator * f2
        return rational_reduce(num, L, lcm)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.denominator, self.poles)

    def __sub__(self, other):
        return self + (-_rat(other))

    def __rsub__(self, other):
        return _rat(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalFunction):
            return RationalFunction(self.numerator * complex(other), self.denominator, self.poles)
        tol = max(self.cluster_tol(), other.cluster_tol())
        poles = self.poles.merged(other.poles, tol)
        return rational_reduce(
            self.numerator * other.numerator, self.denominator * other.denominator, poles
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalFunction":
        if self.numerator.is_zero():
            raise ZeroDivisionError("reciprocal of the zero rational function")
        poles = (
            poly_roots(self.numerator) if self.numerator.degree >= 1 else RootSet((), ())
        )
        return RationalFunction(self.denominator, self.numerator, poles)

    def __truediv__(self, other):
        if not isinstance(other, RationalFunction):
            return self * (1.0 / complex(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return _rat(other) * self.reciprocal()

    def derivative(self) -> "RationalFunction":
        n, d = self.numerator, self.denominator
        num = n.derivative() * d - n * d.derivative()
        poles = RootSet(self.poles.locations, tuple(2 * k for k in self.poles.multiplicities))
        return rational_reduce(num, d * d, poles)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def __repr__(self):
        return f"RationalFunction({self.numerator!r} / {self.denominator!r})"


def _rat(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction.from_poly(x)
    return RationalFunction.constant(complex(x))


def _match(pairs, z, tol):
    for idx, (w, _) in enumerate(pairs):
        if abs(w - z) <= tol:
            return idx
    return None


def _lcm_roots(a: RootSet, b: RootSet, tol: float) -> RootSet:
    pairs = [(z, k) for z, k in a]
    for z, k in b:
        idx = _match(pairs, z, tol)
        if idx is None:
            pairs.append((z, k))
        else:
            pairs[idx] = (pairs[idx][0], max(pairs[idx][1], k))
    return RootSet.build(pairs)


def _cofactor(lcm: RootSet, part: RootSet, tol: float) -> Polynomial:
    roots = []
    for z, k in lcm:
        idx = _match(list(part), z, tol)
        have = part.multiplicities[idx] if idx is not None else 0
        roots.extend([z] * (k - have))
    return Polynomial.from_roots(roots)


def rational_reduce(
    num: Polynomial,
    den: Polynomial,
    poles: RootSet | None = None,
    cluster_tol: float | None = None,
) -> RationalFunction:
    """Cancel common roots of `num` and `den` (within `cluster_tol`)."""
    num, den = _poly(num), _poly(den)
    if den.is_zero():
        raise DegenerateInputError("denominator is the zero polynomial")
    if poles is None:
        poles = poly_roots(den) if den.degree >= 1 else RootSet((), ())
    if num.is_zero():
        return RationalFunction(Polynomial([0]), Polynomial([1.0]), RootSet((), ()))
    if len(poles) == 0 or num.degree == 0:
        return RationalFunction(num, den, poles)
    nroots = poly_roots(num, cluster_tol)
    tol = cluster_tol if cluster_tol is not None else max(
        default_cluster_tol(poles.locations), default_cluster_tol(nroots.locations)
    )
    lead = den.lead
    remaining = []
    cancelled = False
    avail = [[w, mu] for w, mu in nroots]  # numerator roots not yet cancelled
    for z, k in poles:
        idx = _match([(w, mu) for w, mu in avail if mu > 0], z, tol)
        if idx is not None:
            idx = [i for i, (_, mu) in enumerate(avail) if mu > 0][idx]
        j = min(k, avail[idx][1]) if idx is not None else 0
        if j:
            avail[idx][1] -= j
        for _ in range(j):
            num = num.deflate(z)
        if j:
            cancelled = True
        if k - j:
            remaining.append((z, k - j))
    if not cancelled:
        return RationalFunction(num, den, poles)
    new_poles = RootSet.build(remaining)
    return RationalFunction(num, Polynomial.from_roots(new_poles.expanded(), lead), new_poles)


@dataclass(frozen=True)
class PoleTerm:
    pole: complex
    order: int
    coefficients: tuple  # coefficient of (z - pole)^-1, ^-2, ...


def partial_fractions(f: RationalFunction) -> tuple[list[PoleTerm], Polynomial]:
    """Principal parts at every pole plus the polynomial part."""
    f = rational_reduce(f.numerator, f.denominator, f.poles)
    locs = list(f.poles.locations)
    tol = f.cluster_tol()
    for i in range(len(locs)):
        for j in range(i + 1, len(locs)):
            if abs(locs[i] - locs[j]) <= 10 * tol:
                raise IllConditionedInputError(
                    f"poles {locs[i]} and {locs[j]} are too close to separate"
                )
    poly_part, _ = divmod(f.numerator, f.denominator)
    terms = []
    for idx, (p, k) in enumerate(f.poles):
        others = [
            z for j, (z, kk) in enumerate(f.poles) if j != idx for _ in range(kk)
        ]
        other = Polynomial.from_roots(others, f.denominator.lead)
        a = f.numerator.taylor(p, k)
        b = other.taylor(p, k)
        # power-series division h = a / b
        h = np.zeros(k, dtype=complex)
        for n in range(k):
            h[n] = (a[n] - np.dot(h[:n], b[n:0:-1])) / b[0]
        coeffs = tuple(complex(h[k - j]) for j in range(1, k + 1))
        terms.append(PoleTerm(p, k, coeffs))
    return terms, poly_part


def recompose(terms: Sequence[PoleTerm], poly_part: Polynomial):
    """Callable evaluating a partial-fraction expansion."""

    def evaluate(z):
        z = np.asarray(z, dtype=complex)
        out = poly_part(z) + 0j
        for t in terms:
            for j, c in enumerate(t.coefficients, start=1):
                out = out + c / (z - t.pole) ** j
        return out

    return evaluate

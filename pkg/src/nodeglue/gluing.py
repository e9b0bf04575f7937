"""Gluing configuration at t = 0: two extra spheres attached to a catenoid.

C- is attached at the top end of the catenoid (node v0), C+ is attached to C-
at m points (nodes vi).  At t = 0 everything is rational, so the Gauss maps,
the height differential on each component, the growths and the limit graphs
can be computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree
from skimage.measure import find_contours

from .complex_algebra import Polynomial, RationalFunction, poly_roots
from .errors import (
    CriticalLevelError,
    DegenerateConfigurationError,
    OutOfGluingRegionError,
    SingularPointError,
)
from .forms import INFINITY, MeromorphicForm, all_residues
from .weierstrass import WeierstrassData, catenoid

DEFAULT_EPSILON = 0.1
TOP_NODE = "top-node"
CIRCLE_NODE = "circle-node"
PLUS, MINUS = "plus", "minus"


def sigma_pairs(m: int) -> list[tuple[int, int]]:
    """Index pairs (i, m - i) for 1 <= i < m - i, zero-based."""
    return [(i - 1, m - i - 1) for i in range(1, m) if i < m - i]


def in_sigma_slice(z, m: int, tol: float = 1e-12) -> bool:
    """True if z (length m) has z[m-i] = conj z[i] for 1 <= i < m and z[m] real."""
    z = np.asarray(z, dtype=complex)
    if abs(z[m - 1].imag) > tol:
        return False
    return all(abs(z[m - i - 1] - np.conj(z[i - 1])) <= tol for i in range(1, m))


@dataclass(frozen=True)
class GluingConfiguration:
    m: int
    beta_minus: tuple  # beta_0^-, ..., beta_m^-
    beta_plus: tuple  # beta_1^+, ..., beta_m^+
    p_minus: tuple
    p_plus: tuple
    gamma: tuple
    c: tuple = (-1.0,)
    t: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    alpha: tuple = ()
    base: WeierstrassData = field(default_factory=catenoid)

    def __post_init__(self):
        m = self.m
        if m < 2:
            raise ValueError("m must be at least 2")
        for name, n in (("beta_minus", m + 1), ("beta_plus", m), ("p_minus", m), ("p_plus", m), ("gamma", m)):
            vals = tuple(complex(v) for v in getattr(self, name))
            if len(vals) != n:
                raise ValueError(f"{name} must have length {n}")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 <= self.t < self.epsilon**2:
            raise ValueError("t must lie in [0, epsilon^2)")

    def is_sigma_symmetric(self, tol: float = 1e-12) -> bool:
        m = self.m
        bm = self.beta_minus
        if abs(bm[0].imag) > tol:
            return False
        return all(
            in_sigma_slice(v, m, tol) for v in (bm[1:], self.beta_plus, self.p_plus, self.p_minus, self.gamma)
        )

    def replace(self, **kw) -> "GluingConfiguration":
        return replace(self, **kw)


def central_configuration(m: int, epsilon: float = DEFAULT_EPSILON) -> GluingConfiguration:
    if m < 2:
        raise ValueError("m must be at least 2")
    w = np.exp(2j * np.pi * np.arange(1, m + 1) / m)
    # snap so exact values like -1, 1, i come out exact
    w = np.round(w.real, 15) + 1j * np.round(w.imag, 15)
    b = 1.0 / (m - 1)
    return GluingConfiguration(
        m=m,
        beta_minus=(-1.0,) + (b,) * m,
        beta_plus=(b,) * m,
        p_minus=tuple(w),
        p_plus=tuple(np.conj(w)),
        gamma=(b,) * m,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class GluedComponents:
    g_minus: RationalFunction
    g_plus: RationalFunction
    phi3_sigma: MeromorphicForm
    phi3_minus: MeromorphicForm
    phi3_plus: MeromorphicForm


def _check_distinct(points, name, tol=1e-12):
    for i, a in enumerate(points):
        if abs(a) <= tol:
            raise DegenerateConfigurationError(f"{name}[{i}] is at the origin")
        for j in range(i):
            if abs(a - points[j]) <= tol * (1 + abs(a)):
                raise DegenerateConfigurationError(f"{name}[{j}] and {name}[{i}] coincide")


def build_components(cfg: GluingConfiguration) -> GluedComponents:
    _check_distinct(cfg.p_minus, "p_minus")
    _check_distinct(cfg.p_plus, "p_plus")
    if any(b == 0 for b in cfg.beta_minus + cfg.beta_plus):
        raise DegenerateConfigurationError("a beta coefficient vanishes")
    g_minus = RationalFunction.from_simple_poles((0.0,) + cfg.p_minus, cfg.beta_minus)
    g_plus = RationalFunction.from_simple_poles(cfg.p_plus, cfg.beta_plus)
    csum = sum(cfg.c)
    phi3_sigma = MeromorphicForm.simple_poles([0.0], [-cfg.c[0]])
    phi3_minus = MeromorphicForm.simple_poles(
        (0.0,) + cfg.p_minus, (-csum,) + tuple(-g for g in cfg.gamma)
    )
    phi3_plus = MeromorphicForm.simple_poles(cfg.p_plus, cfg.gamma)
    return GluedComponents(g_minus, g_plus, phi3_sigma, phi3_minus, phi3_plus)


def node_residue_mismatch(cfg: GluingConfiguration, comps: GluedComponents | None = None) -> float:
    """Largest violation of residue matching across the nodes."""
    comps = comps or build_components(cfg)
    top = comps.phi3_sigma.residue_at(INFINITY) + comps.phi3_minus.residue_at(0.0)
    worst = abs(top)
    for pm, pp in zip(cfg.p_minus, cfg.p_plus):
        worst = max(worst, abs(comps.phi3_minus.residue_at(pm) + comps.phi3_plus.residue_at(pp)))
    return worst


def node_transition(v: complex, t: float, neck: str, epsilon: float = DEFAULT_EPSILON) -> complex:
    """Coordinate change across a node: t/v at the top node, t^2/v at a circle node."""
    if t <= 0:
        raise ValueError("t must be positive")
    k = {TOP_NODE: t, CIRCLE_NODE: t * t}.get(neck)
    if k is None:
        raise ValueError(f"unknown neck {neck!r}")
    r = abs(v)
    if v == 0 or not (k / epsilon * (1 - 1e-12) <= r <= epsilon * (1 + 1e-12)):
        raise OutOfGluingRegionError(f"|v| = {r} outside [{k / epsilon}, {epsilon}]")
    return k / v


def growth_vector(cfg: GluingConfiguration, comps: GluedComponents | None = None) -> np.ndarray:
    """Logarithmic growths: minus the residues of phi3 at the ends.

    Order: ends of the base other than the top one, then infinity in C-,
    then infinity in C+.
    """
    comps = comps or build_components(cfg)
    out = [-comps.phi3_sigma.residue_at(0.0).real]
    out.append(-comps.phi3_minus.residue_at(INFINITY).real)
    out.append(-comps.phi3_plus.residue_at(INFINITY).real)
    return np.array(out)


# --------------------------------------------------------------------------
# limit graphs


@dataclass(frozen=True)
class LogPotential:
    """f(z) = sum_j w_j log|z - s_j| with real weights."""

    sites: tuple
    weights: tuple

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        with np.errstate(divide="ignore"):
            for s, w in zip(self.sites, self.weights):
                out = out + w * np.log(np.abs(z - s))
        return out

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    def gradient(self, z):
        """Gradient as a complex number: sum_j w_j / conj(z - s_j)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for s, w in zip(self.sites, self.weights):
            out = out + w / np.conj(z - s)
        return out

    def project(self, z, level: float, iterations: int = 6):
        """Newton steps along the gradient onto {f = level}."""
        z = np.array(z, dtype=complex)
        for _ in range(iterations):
            g = self.gradient(z)
            z = z - (self(z) - level) * g / np.abs(g) ** 2
        return z

    def critical_points(self) -> list[complex]:
        # roots of sum_j w_j / (z - s_j)
        num = Polynomial([0.0])
        for j, w in enumerate(self.weights):
            others = [s for k, s in enumerate(self.sites) if k != j]
            num = num + Polynomial.from_roots(others, w) if others else num + Polynomial([w])
        if num.is_zero() or num.degree < 1:
            return []
        return [z for z, _ in poly_roots(num)]

    def critical_values(self) -> list[float]:
        return [float(self(z)) for z in self.critical_points()]


def _real_weights(values, name):
    out = []
    for v in values:
        v = complex(v)
        if abs(v.imag) > 1e-12 * (1 + abs(v)):
            raise ValueError(f"{name} must be real for a single-valued limit graph")
        out.append(v.real)
    return out


def limit_potential(cfg: GluingConfiguration, side: str) -> LogPotential:
    """u+ = sum gamma_i log|z - p_i+|;  u- = (sum c) log|z| + sum gamma_i log|z - p_i-|."""
    g = _real_weights(cfg.gamma, "gamma")
    if side == PLUS:
        return LogPotential(tuple(cfg.p_plus), tuple(g))
    if side == MINUS:
        return LogPotential((0j,) + tuple(cfg.p_minus), (sum(cfg.c),) + tuple(g))
    raise ValueError(f"side must be {PLUS!r} or {MINUS!r}")


def limit_graph(cfg: GluingConfiguration, side: str, z: complex) -> float:
    u = limit_potential(cfg, side)
    z = complex(z)
    for s in u.sites:
        if abs(z - s) <= 1e-300 or abs(z - s) < 1e-14 * (1 + abs(s)):
            raise SingularPointError(f"{z} is a logarithmic singularity")
    return float(u(z))


def limit_height(cfg: GluingConfiguration, side: str) -> LogPotential:
    """Height x3 of the limit graph: u+ on the plus side, -u- on the minus side."""
    u = limit_potential(cfg, side)
    if side == MINUS:
        return LogPotential(u.sites, tuple(-w for w in u.weights))
    return u


@dataclass
class LevelCurve:
    points: np.ndarray  # complex, closed (first == last)
    convex: bool
    total_turning: float
    negative_turning: float
    depth: int = 0
    window: str = "global"

    @property
    def leftmost(self) -> float:
        return float(self.points.real.min())


def turning(points: np.ndarray) -> tuple[float, float]:
    """(total absolute turning, turning against the majority orientation)."""
    p = np.asarray(points, dtype=complex)
    if abs(p[0] - p[-1]) > 0:
        p = np.append(p, p[0])
    scale = np.ptp(p.real) + np.ptp(p.imag)
    keep = [p[0]]
    for z in p[1:]:
        if abs(z - keep[-1]) > 1e-9 * scale:
            keep.append(z)
    p = np.array(keep)
    e = np.diff(p)
    e = np.append(e, e[0])
    ang = np.angle(e[1:] / e[:-1])
    total = float(np.abs(ang).sum())
    pos, neg = ang[ang > 0].sum(), -ang[ang < 0].sum()
    return total, float(min(pos, neg))


def _point_in_polygon(z: complex, poly: np.ndarray) -> bool:
    x, y = z.real, z.imag
    xs, ys = poly.real, poly.imag
    x0, y0, x1, y1 = xs[:-1], ys[:-1], xs[1:], ys[1:]
    cond = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return bool(np.count_nonzero(cond & (x < xint)) % 2)


def _contours(values: np.ndarray, level: float, to_z) -> list[np.ndarray]:
    v = np.clip(np.nan_to_num(values, nan=level, posinf=level + 1e6, neginf=level - 1e6), level - 1e6, level + 1e6)
    out = []
    for c in find_contours(v, level):
        if len(c) < 4 or np.any(c[0] != c[-1]):
            continue  # not closed inside this window
        out.append(to_z(c))
    return out


def _grid_window(f, center: complex, half: float, n: int):
    xs = center.real + np.linspace(-half, half, n)
    ys = center.imag + np.linspace(-half, half, n)
    Z = xs[None, :] + 1j * ys[:, None]
    step = 2 * half / (n - 1)

    def to_z(c):
        return (center.real - half + c[:, 1] * step) + 1j * (center.imag - half + c[:, 0] * step)

    return f(Z), to_z, step


def _same_curve(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    ta = cKDTree(np.column_stack([a.real, a.imag]))
    tb = cKDTree(np.column_stack([b.real, b.imag]))
    da, _ = tb.query(np.column_stack([a.real, a.imag]))
    db, _ = ta.query(np.column_stack([b.real, b.imag]))
    return max(da.max(), db.max()) < tol


def level_curves(cfg: GluingConfiguration, side: str, height: float, resolution: int = 512) -> list[LevelCurve]:
    """Closed components of {x3 = height} for the limit graph on one side.

    Marching squares on a global window around the singularities, refined by
    local windows around singularities whose level circle is too small for
    the global grid and by a window in the coordinate 1/z for the component
    around infinity.
    """
    f = limit_height(cfg, side)
    for cv in f.critical_values():
        if abs(cv - height) <= 1e-9:
            raise CriticalLevelError(f"level {height} is the critical value {cv}")
    sites = np.array(f.sites, dtype=complex)
    lo = complex(sites.real.min(), sites.imag.min())
    hi = complex(sites.real.max(), sites.imag.max())
    center = 0.5 * (lo + hi)
    half = 1.5 * max(0.5 * (hi - lo).real, 0.5 * (hi - lo).imag, 1.0)
    n = resolution if resolution % 2 == 0 else resolution + 1

    found: list[tuple[np.ndarray, float, str]] = []
    vals, to_z, step = _grid_window(f, center, half, n)
    found += [(c, step, "global") for c in _contours(vals, height, to_z)]

    for j, (s, w) in enumerate(zip(f.sites, f.weights)):
        if w == 0:
            continue
        C = sum(wk * math.log(abs(s - sk)) for k, (sk, wk) in enumerate(zip(f.sites, f.weights)) if k != j)
        r = math.exp((height - C) / w)
        if r < 8 * step:
            lv, lz, ls = _grid_window(f, complex(s), 3 * r, 128)
            found += [(c, ls, "local") for c in _contours(lv, height, lz)]

    W = f.total_weight
    if W != 0:
        R = math.exp(height / W) + abs(center)
        if R > half / 2:
            g = lambda w: f(1.0 / np.where(w == 0, np.nan, w))
            lv, lz, ls = _grid_window(g, 0j, 3.0 / R, 256)
            for c in _contours(lv, height, lz):
                zc = 1.0 / c
                found.append((zc, ls * R * R, "infinity"))

    # drop duplicates, keeping the finer extraction
    found.sort(key=lambda x: x[1])
    kept: list[tuple[np.ndarray, float, str]] = []
    for c, s, win in found:
        if not any(_same_curve(c, k, 3 * max(s, ks)) for k, ks, _ in kept):
            kept.append((c, s, win))

    curves = []
    for c, s, win in kept:
        c = f.project(c, height)
        total, neg = turning(c)
        curves.append(LevelCurve(c, neg < 1e-3 * total, total, neg, window=win))
    curves.sort(key=lambda lc: lc.leftmost)
    for a in curves:
        a.depth = sum(_point_in_polygon(a.points[0], b.points) for b in curves if b is not a)
    return curves

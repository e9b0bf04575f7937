"""Residuals of the period and zero/pole equations at t = 0.

Parameters are written relative to the central configuration:

    gamma_i    = gamma_m + gamma_dot_i          (1 <= i < m)
    beta_0^-   = sum(c) + beta_minus_dot_0
    beta_i^-   = gamma_i + beta_minus_dot_i
    beta_i^+   = gamma_i + beta_plus_dot_i
    p_i^+      = conj(p_i^-) + p_plus_dot_i

so the central value has every dotted coordinate equal to zero.

Symmetric subspaces.  V is the set of z in C^(m-1) with z_(m-i) = conj(z_i).
Its free real coordinates are (Re z_i, Im z_i) for i < m/2, plus Re z_(m/2)
when m is even, giving real dimension m - 1.  "V x R" appends one real entry.

Normalization of H^A: the horizontal A-period residual is the circle-integral
expression divided by i, i.e.

    H^A_i = -pi conj(Res_{p_i^+} g^+ phi3) + pi Res_{p_i^-} g^- phi3,

which makes sum_i p_i^- H^A_i real and gives H^A_(m-i) = conj(H^A_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .complex_algebra import Polynomial, RootSet, poly_roots
from .errors import LabelingAmbiguityError, PathThroughPoleError, TrackingError
from .forms import DEFAULT_EPSILON, Circle, Polyline, arc_polyline, circle_period, integrate_callable
from .gluing import GluingConfiguration, GluedComponents, build_components, central_configuration

WEIERSTRASS_DISK_RADIUS = 0.5
REAL_ROOT_TOL = 1e-9


# --------------------------------------------------------------------------
# symmetric packing


def pack_V(z) -> np.ndarray:
    """Free real coordinates of an element of V (length m - 1)."""
    z = np.asarray(z, dtype=complex)
    m = len(z) + 1
    out = []
    for i in range(1, m):
        if 2 * i < m:
            out += [z[i - 1].real, z[i - 1].imag]
        elif 2 * i == m:
            out.append(z[i - 1].real)
    return np.array(out, dtype=float)


def unpack_V(x, m: int) -> np.ndarray:
    x = list(np.asarray(x, dtype=float))
    z = np.zeros(m - 1, dtype=complex)
    k = 0
    for i in range(1, m):
        if 2 * i < m:
            z[i - 1] = complex(x[k], x[k + 1])
            z[m - i - 1] = complex(x[k], -x[k + 1])
            k += 2
        elif 2 * i == m:
            z[i - 1] = x[k]
            k += 1
    if k != len(x):
        raise ValueError(f"expected {k} real coordinates, got {len(x)}")
    return z


def pack_VR(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.append(pack_V(z[:-1]), z[-1].real)


def unpack_VR(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.append(unpack_V(x[:-1], m), x[-1])


def pack_RVR(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([[z[0].real], pack_VR(z[1:])])


def unpack_RVR(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.concatenate([[complex(x[0])], unpack_VR(x[1:], m)])


# --------------------------------------------------------------------------
# parameters


def parameter_blocks(m: int) -> dict[str, slice]:
    """Real coordinate ranges of each parameter block, in packing order."""
    sizes = [
        ("c", 1),
        ("gamma_m", 1),
        ("gamma_dot", m - 1),
        ("beta_minus_dot", m + 1),
        ("beta_plus_dot", m),
        ("p_minus", m),
        ("p_plus_dot", m),
    ]
    out, k = {}, 0
    for name, n in sizes:
        out[name] = slice(k, k + n)
        k += n
    return out


@dataclass(frozen=True)
class ParameterVector:
    m: int
    c1: float
    gamma_m: float
    gamma_dot: np.ndarray  # m - 1 complex
    beta_minus_dot: np.ndarray  # m + 1 complex
    beta_plus_dot: np.ndarray  # m complex
    p_minus: np.ndarray  # m complex
    p_plus_dot: np.ndarray  # m complex
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        m = self.m
        for name, n in (
            ("gamma_dot", m - 1),
            ("beta_minus_dot", m + 1),
            ("beta_plus_dot", m),
            ("p_minus", m),
            ("p_plus_dot", m),
        ):
            a = np.array(getattr(self, name), dtype=complex).reshape(-1)
            if a.size != n:
                raise ValueError(f"{name} must have length {n}")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def central(cls, m: int, epsilon: float = DEFAULT_EPSILON) -> "ParameterVector":
        cfg = central_configuration(m, epsilon)
        return cls(
            m=m,
            c1=-1.0,
            gamma_m=1.0 / (m - 1),
            gamma_dot=np.zeros(m - 1),
            beta_minus_dot=np.zeros(m + 1),
            beta_plus_dot=np.zeros(m),
            p_minus=np.array(cfg.p_minus),
            p_plus_dot=np.zeros(m),
            epsilon=epsilon,
        )

    @classmethod
    def scaling_direction(cls, m: int, s: float, epsilon: float = DEFAULT_EPSILON) -> "ParameterVector":
        """Central data with the whole surface scaled by 1 + s (Gauss maps fixed)."""
        x = cls.central(m, epsilon)
        lam = 1.0 + s
        return x.replace(
            c1=-lam,
            gamma_m=lam / (m - 1),
            beta_minus_dot=np.concatenate([[s], np.full(m, -s / (m - 1))]),
            beta_plus_dot=np.full(m, -s / (m - 1)),
        )

    def replace(self, **kw) -> "ParameterVector":
        return replace(self, **kw)

    @property
    def gamma(self) -> np.ndarray:
        return np.append(self.gamma_m + self.gamma_dot, self.gamma_m)

    def configuration(self) -> GluingConfiguration:
        g = self.gamma
        bm = np.concatenate([[self.c1 + self.beta_minus_dot[0]], g + self.beta_minus_dot[1:]])
        return GluingConfiguration(
            m=self.m,
            beta_minus=tuple(bm),
            beta_plus=tuple(g + self.beta_plus_dot),
            p_minus=tuple(self.p_minus),
            p_plus=tuple(np.conj(self.p_minus) + self.p_plus_dot),
            gamma=tuple(g),
            c=(self.c1,),
            epsilon=self.epsilon,
        )

    def pack(self) -> np.ndarray:
        """Real coordinates on the symmetric slice (length 5m + 2)."""
        return np.concatenate(
            [
                [self.c1, self.gamma_m],
                pack_V(self.gamma_dot),
                pack_RVR(self.beta_minus_dot),
                pack_VR(self.beta_plus_dot),
                pack_VR(self.p_minus),
                pack_VR(self.p_plus_dot),
            ]
        )

    @classmethod
    def unpack(cls, x, m: int, epsilon: float = DEFAULT_EPSILON) -> "ParameterVector":
        x = np.asarray(x, dtype=float)
        b = parameter_blocks(m)
        if x.size != b["p_plus_dot"].stop:
            raise ValueError(f"expected {b['p_plus_dot'].stop} real coordinates")
        return cls(
            m=m,
            c1=float(x[b["c"]][0]),
            gamma_m=float(x[b["gamma_m"]][0]),
            gamma_dot=unpack_V(x[b["gamma_dot"]], m),
            beta_minus_dot=unpack_RVR(x[b["beta_minus_dot"]], m),
            beta_plus_dot=unpack_VR(x[b["beta_plus_dot"]], m),
            p_minus=unpack_VR(x[b["p_minus"]], m),
            p_plus_dot=unpack_VR(x[b["p_plus_dot"]], m),
            epsilon=epsilon,
        )


# --------------------------------------------------------------------------
# residual container


def residual_blocks(m: int) -> dict[str, slice]:
    sizes = [("Z_minus", m), ("Z_plus", m - 1), ("V", m - 1), ("H_A", m), ("H_B", m - 1)]
    out, k = {}, 0
    for name, n in sizes:
        out[name] = slice(k, k + n)
        k += n
    return out


@dataclass
class ResidualVector:
    m: int
    Z_minus: np.ndarray  # m complex, Z_(m+1-i) = conj Z_i
    Z_plus: np.ndarray  # m - 1 real coefficients, ascending
    V_A: np.ndarray  # m - 1 real
    H_A: np.ndarray  # m complex, H_(m-i) = conj H_i, H_m real
    V_B: np.ndarray  # m - 1 real, V_(m-i) = V_i
    H_B: np.ndarray  # m - 1 complex in V
    F_base: np.ndarray = field(default_factory=lambda: np.zeros(0))
    zeros: RootSet | None = None

    def max_norm(self) -> float:
        parts = [self.Z_minus, self.Z_plus, self.V_A, self.H_A, self.V_B, self.H_B, self.F_base]
        return float(max((np.abs(p).max() for p in parts if np.size(p)), default=0.0))

    def block_norms(self) -> dict[str, float]:
        out = {}
        for name in ("Z_minus", "Z_plus", "V_A", "H_A", "V_B", "H_B"):
            a = getattr(self, name)
            out[name] = float(np.abs(a).max()) if np.size(a) else 0.0
        return out

    def symmetry_defect(self) -> float:
        """Largest violation of the symmetry relations of each block."""
        m = self.m
        d = [0.0]
        for i in range(1, m + 1):
            d.append(abs(self.Z_minus[m - i] - np.conj(self.Z_minus[i - 1])))
        d.append(np.abs(np.imag(self.Z_plus)).max() if m > 1 else 0.0)
        for i in range(1, m):
            d.append(abs(self.V_A[m - i - 1] + self.V_A[i - 1]))
            d.append(abs(self.V_B[m - i - 1] - self.V_B[i - 1]))
            d.append(abs(self.H_A[m - i - 1] - np.conj(self.H_A[i - 1])))
            d.append(abs(self.H_B[m - i - 1] - np.conj(self.H_B[i - 1])))
        d.append(abs(self.H_A[m - 1].imag))
        return float(max(d))

    def pack(self) -> np.ndarray:
        """Real coordinates of the residual in the symmetric target (length 5m - 3)."""
        m = self.m
        z = []
        for i in range(1, m + 1):
            j = m + 1 - i
            if i < j:
                z += [self.Z_minus[i - 1].real, self.Z_minus[i - 1].imag]
            elif i == j:
                z.append(self.Z_minus[i - 1].real)
        va = [self.V_A[i - 1] for i in range(1, m) if 2 * i < m]
        vb = [self.V_B[i - 1] for i in range(1, m) if 2 * i <= m]
        return np.concatenate(
            [
                z,
                np.real(self.Z_plus),
                va,
                vb,
                pack_VR(self.H_A),
                pack_V(self.H_B),
            ]
        ).astype(float)


# --------------------------------------------------------------------------
# zeros


def _sigma_labels(roots: list[complex], tol: float) -> list[complex]:
    upper = sorted((z for z in roots if z.imag > tol * (1 + abs(z))), key=lambda z: np.angle(z))
    real = [z for z in roots if abs(z.imag) <= tol * (1 + abs(z))]
    lower = [z for z in roots if z.imag < -tol * (1 + abs(z))]
    if len(real) > 1 or len(upper) != len(lower):
        raise LabelingAmbiguityError(
            f"zeros cannot be paired by conjugation ({len(upper)} upper, {len(real)} real, {len(lower)} lower)"
        )
    paired = []
    pool = list(lower)
    for z in upper:
        k = int(np.argmin([abs(w - np.conj(z)) for w in pool]))
        paired.append(pool.pop(k))
    return upper + [complex(z.real, 0.0) for z in real] + paired[::-1]


def label_zeros(phi3_minus, previous: RootSet | None = None, expected: int | None = None) -> RootSet:
    """Zeros of the height differential in C-, ordered so zeta_(m+1-i) = conj zeta_i.

    With `previous`, zeros are matched to the previous labels by minimal total
    displacement instead, which keeps labels continuous along a homotopy.
    The returned RootSet keeps the label order (it is not re-sorted).
    """
    num = phi3_minus.density.numerator
    rs = poly_roots(num)
    if any(k > 1 for _, k in rs):
        raise LabelingAmbiguityError("the height differential has a multiple zero")
    roots = [complex(z) for z, _ in rs]
    if expected is not None and len(roots) != expected:
        raise TrackingError(f"expected {expected} zeros, found {len(roots)}")
    if previous is not None:
        prev = list(previous.locations)
        if len(prev) != len(roots):
            raise TrackingError("number of zeros changed")
        cost = np.abs(np.subtract.outer(np.array(prev), np.array(roots)))
        _, cols = linear_sum_assignment(cost)
        ordered = [roots[c] for c in cols]
    else:
        ordered = _sigma_labels(roots, REAL_ROOT_TOL)
    return RootSet(tuple(ordered), (1,) * len(ordered))


# --------------------------------------------------------------------------
# residual blocks


def _components(X: ParameterVector) -> tuple[GluingConfiguration, GluedComponents]:
    cfg = X.configuration()
    return cfg, build_components(cfg)


def residual_Z_minus(X: ParameterVector, previous: RootSet | None = None) -> tuple[np.ndarray, RootSet]:
    cfg, comps = _components(X)
    zeros = label_zeros(comps.phi3_minus, previous, expected=X.m)
    return np.array([comps.g_minus(z) for z in zeros.locations]), zeros


def weierstrass_polynomial(phi3_plus, expected_degree: int, radius: float = WEIERSTRASS_DISK_RADIUS) -> Polynomial:
    """Monic polynomial whose roots are the zeros of phi3_plus in |z| < radius."""
    num = phi3_plus.density.numerator
    rs = poly_roots(num)
    inside = [(z, k) for z, k in rs if abs(z) < radius]
    count = sum(k for _, k in inside)
    if count != expected_degree:
        raise TrackingError(f"{count} zeros in the disk of radius {radius}, expected {expected_degree}")
    if count == num.degree:
        return num.monic()  # exact: no root-finding error
    return Polynomial.from_roots([z for z, k in inside for _ in range(k)])


def residual_Z_plus(X: ParameterVector) -> np.ndarray:
    m = X.m
    cfg, comps = _components(X)
    P = comps.g_plus.numerator.monic()
    if P.degree != m - 1:
        raise TrackingError("the numerator of g+ has the wrong degree")
    R = weierstrass_polynomial(comps.phi3_plus, m - 1)
    diff = (P - R).coefficients
    out = np.zeros(m - 1, dtype=complex)
    out[: min(m - 1, diff.size)] = diff[: m - 1]
    return out.real if np.all(np.abs(out.imag) <= 1e-9) else out


def _regular_part_at(poles, residues, point_index: int, z: complex) -> complex:
    return sum(r / (z - p) for j, (p, r) in enumerate(zip(poles, residues)) if j != point_index)


def product_residue(poles, a, b, index: int) -> complex:
    """Residue at poles[index] of (sum a_j/(z - p_j)) (sum b_j/(z - p_j))."""
    p = poles[index]
    return a[index] * _regular_part_at(poles, b, index, p) + b[index] * _regular_part_at(poles, a, index, p)


def horizontal_A(cfg: GluingConfiguration) -> np.ndarray:
    m = cfg.m
    csum = sum(cfg.c)
    pm = (0j,) + cfg.p_minus
    gm = cfg.beta_minus
    fm = (-csum,) + tuple(-g for g in cfg.gamma)
    pp, gp, fp = cfg.p_plus, cfg.beta_plus, cfg.gamma
    out = np.zeros(m, dtype=complex)
    for i in range(m):
        rp = product_residue(pp, gp, fp, i)
        rm = product_residue(pm, gm, fm, i + 1)
        out[i] = -math.pi * np.conj(rp) + math.pi * rm
    return out


def horizontal_A_quadrature(cfg: GluingConfiguration, epsilon: float | None = None) -> np.ndarray:
    """Same quantity from direct quadrature of the circle integrals."""
    eps = cfg.epsilon if epsilon is None else epsilon
    comps = build_components(cfg)
    fp = comps.g_plus * comps.phi3_plus.density
    fm = comps.g_minus * comps.phi3_minus.density
    out = np.zeros(cfg.m, dtype=complex)
    for i in range(cfg.m):
        ip, _ = integrate_callable(fp, Circle(cfg.p_plus[i], eps))
        im, _ = integrate_callable(fm, Circle(cfg.p_minus[i], eps))
        out[i] = 0.5 * (np.conj(ip) + im) / 1j
    return out


def hb_path_minus(p_minus, i: int, turn: int = 1) -> Polyline:
    """From p_i^- radially in, along a circle, radially out to p_m^-."""
    a, b = complex(p_minus[i]), complex(p_minus[-1])
    r = 0.5 * min(abs(p) for p in p_minus)
    return _radial_arc_path(a, b, r, turn)


def hb_path_plus(p_plus, i: int, turn: int = 1) -> Polyline:
    """From p_m^+ radially out, along a circle, radially in to p_i^+."""
    a, b = complex(p_plus[-1]), complex(p_plus[i])
    r = 1.5 * max(abs(p) for p in p_plus)
    return _radial_arc_path(a, b, r, turn)


def _arc_angle(a: complex, b: complex) -> float:
    return (np.angle(b) - np.angle(a) + np.pi) % (2 * np.pi) - np.pi


def is_arc_tie(a: complex, b: complex) -> bool:
    """True when a and b are diametrically opposite, so the shorter arc is not unique."""
    return abs(abs(_arc_angle(a, b)) - np.pi) < 1e-12


def _radial_arc_path(a: complex, b: complex, r: float, turn: int = 1) -> Polyline:
    """Radial leg, shorter arc, radial leg; at a tie `turn` picks the sense (+1 ccw)."""
    ta = np.angle(a)
    d = _arc_angle(a, b)
    if is_arc_tie(a, b):
        d = np.pi * turn
    arc = arc_polyline(0j, r, ta, ta + d)
    pts = [a] + list(arc) + [b]
    clean = [pts[0]]
    for z in pts[1:]:
        if abs(z - clean[-1]) > 1e-14:
            clean.append(z)
    return Polyline(tuple(clean))


def _ratio(f, g):
    def h(z):
        return f(z) / g(z)

    return h


def horizontal_B(cfg: GluingConfiguration, comps: GluedComponents | None = None, pole_margin: float | None = None) -> np.ndarray:
    """Renormalized horizontal B-periods at t = 0, by fixed Gauss-Legendre quadrature."""
    comps = comps or build_components(cfg)
    margin = cfg.epsilon / 2 if pole_margin is None else pole_margin
    m = cfg.m
    rm = _ratio(comps.phi3_minus.density, comps.g_minus)
    rp = _ratio(comps.phi3_plus.density, comps.g_plus)
    sing_m = [z for z, _ in poly_roots(comps.g_minus.numerator)]
    sing_p = [z for z, _ in poly_roots(comps.g_plus.numerator)] if comps.g_plus.numerator.degree > 0 else []
    out = np.zeros(m - 1, dtype=complex)
    for i in range(m - 1):
        vals = []
        for rat, sing, pts, build in (
            (rm, sing_m, cfg.p_minus, hb_path_minus),
            (rp, sing_p, cfg.p_plus, hb_path_plus),
        ):
            # at a tie the two arcs are mirror images; averaging keeps H^B in V
            turns = (1, -1) if is_arc_tie(pts[i], pts[-1]) else (1,)
            acc = 0j
            for turn in turns:
                path = build(pts, i, turn)
                for s in sing:
                    if path.distance_to(s) < margin:
                        raise PathThroughPoleError(f"integration path passes near {s}")
                acc += integrate_callable(rat, path, method="gauss")[0]
            vals.append(acc / len(turns))
        out[i] = 0.5 * np.conj(vals[0]) - 0.5 * vals[1]
    return out


def residual_periods(X: ParameterVector) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    cfg, comps = _components(X)
    m = X.m
    g = np.array(cfg.gamma)
    V_A = np.array(
        [circle_period(comps.phi3_plus, Circle(cfg.p_plus[j], cfg.epsilon)).real for j in range(m - 1)]
    )
    V_B = -2.0 * (g[: m - 1] - g[m - 1]).real
    return V_A, horizontal_A(cfg), V_B, horizontal_B(cfg, comps)


def full_residual(X: ParameterVector, previous: RootSet | None = None) -> ResidualVector:
    Zm, zeros = residual_Z_minus(X, previous)
    Zp = residual_Z_plus(X)
    V_A, H_A, V_B, H_B = residual_periods(X)
    return ResidualVector(X.m, Zm, Zp, V_A, H_A, V_B, H_B, zeros=zeros)


def summation_identity(m: int, gamma_m: float) -> float:
    """Closed form of sum_i p_i^- H^A_i with p^- central and the other parameters central."""
    return -2 * math.pi * m * (m - 1) * gamma_m**2 + 2 * math.pi * m * gamma_m

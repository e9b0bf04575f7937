"""Finite-difference certificate of the linearized equations at the central value.

Residuals involve complex conjugation, so complex-step differentiation does
not apply; everything is differentiated by real central differences in the
free real coordinates of the symmetric slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoisyJacobianError
from .equations import (
    ParameterVector,
    full_residual,
    horizontal_A,
    horizontal_B,
    parameter_blocks,
    residual_blocks,
    residual_periods,
)

RANK_TOL = 1e-6
OFFBLOCK_TOL = 1e-8
STEP_CONSISTENCY_TOL = 1e-3
DEFAULT_STEP = 1e-6
M_CAP = 10

# (residual block, parameter blocks whose partial derivative is zero at the central value)
DECLARED_ZERO = {
    "Z_minus": ("c", "gamma_m", "gamma_dot", "beta_plus_dot", "p_minus", "p_plus_dot"),
    "Z_plus": ("c", "gamma_m", "gamma_dot", "beta_minus_dot", "p_minus", "p_plus_dot"),
    "V": ("c", "gamma_m", "beta_minus_dot", "beta_plus_dot", "p_minus", "p_plus_dot"),
    "H_B": ("c", "gamma_m", "gamma_dot", "p_minus"),
}


@dataclass
class BlockReport:
    block_name: str
    matrix: np.ndarray
    smallest_singular_value: float
    largest_offblock_entry: float
    verdict: bool
    detail: dict = field(default_factory=dict)


@dataclass
class JacobianReport:
    m: int
    jacobian: np.ndarray
    blocks: list
    singular_values: np.ndarray
    kernel_dimension: int
    step_change: float

    @property
    def passed(self) -> bool:
        return all(b.verdict for b in self.blocks)

    def block(self, name: str) -> BlockReport:
        for b in self.blocks:
            if b.block_name == name:
                return b
        raise KeyError(name)


def _sv(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(a, compute_uv=False) if a.size else np.zeros(0)


def finite_difference_jacobian(m: int, step: float = DEFAULT_STEP) -> np.ndarray:
    X0 = ParameterVector.central(m)
    x0 = X0.pack()
    zeros = full_residual(X0).zeros
    cols = []
    for k in range(x0.size):
        h = step * max(1.0, abs(x0[k]))
        xp, xm = x0.copy(), x0.copy()
        xp[k] += h
        xm[k] -= h
        rp = full_residual(ParameterVector.unpack(xp, m), previous=zeros).pack()
        rm = full_residual(ParameterVector.unpack(xm, m), previous=zeros).pack()
        cols.append((rp - rm) / (2 * h))
    return np.column_stack(cols)


def _rank(a: np.ndarray) -> int:
    return int(np.sum(_sv(a) > RANK_TOL))


def v_block_unconstrained(m: int, step: float = DEFAULT_STEP) -> np.ndarray:
    """d(V^A, V^B)/d(Re, Im of each gamma_dot_i), ignoring the symmetry constraint."""
    X0 = ParameterVector.central(m)
    cols = []
    for i in range(m - 1):
        for unit in (1.0, 1j):
            out = []
            for sgn in (1, -1):
                gd = np.array(X0.gamma_dot)
                gd[i] += sgn * step * unit
                VA, _, VB, _ = residual_periods(X0.replace(gamma_dot=gd))
                out.append(np.concatenate([VA, VB]))
            cols.append((out[0] - out[1]) / (2 * step))
    return np.column_stack(cols)


def hb_complex_derivative(m: int, step: float = DEFAULT_STEP) -> tuple[np.ndarray, float]:
    """dH^B_i/dpdot_j as a complex (m-1) x m matrix, and its Cauchy-Riemann defect."""
    X0 = ParameterVector.central(m)
    D = np.zeros((m - 1, m), dtype=complex)
    cr = 0.0
    for j in range(m):
        d = {}
        for unit in (1.0, 1j):
            vals = []
            for sgn in (1, -1):
                pd = np.array(X0.p_plus_dot)
                pd[j] += sgn * step * unit
                vals.append(horizontal_B(X0.replace(p_plus_dot=pd).configuration()))
            d[unit] = (vals[0] - vals[1]) / (2 * step)
        D[:, j] = d[1.0]
        cr = max(cr, float(np.abs(d[1j] - 1j * d[1.0]).max()))
    return D, cr


def ha_complex_derivative(m: int, step: float = DEFAULT_STEP) -> np.ndarray:
    """d H^A / d(p_1^-, ..., p_(m-1)^-, gamma_m), complex m x m, other parameters central."""
    X0 = ParameterVector.central(m)
    cols = []
    for j in range(m - 1):
        vals = []
        for sgn in (1, -1):
            p = np.array(X0.p_minus)
            p[j] += sgn * step
            vals.append(horizontal_A(X0.replace(p_minus=p).configuration()))
        cols.append((vals[0] - vals[1]) / (2 * step))
    vals = [horizontal_A(X0.replace(gamma_m=X0.gamma_m + s * step).configuration()) for s in (1, -1)]
    cols.append((vals[0] - vals[1]) / (2 * step))
    return np.column_stack(cols)


def jacobian_at_central(m: int, step: float = DEFAULT_STEP, cap: int = M_CAP) -> JacobianReport:
    if not 2 <= m <= cap:
        raise ValueError(f"m must lie in [2, {cap}]")
    J = finite_difference_jacobian(m, step)
    J2 = finite_difference_jacobian(m, step / 2)
    norm = float(np.linalg.norm(J, 2))
    change = float(np.abs(J - J2).max())
    if change > STEP_CONSISTENCY_TOL * max(norm, 1.0):
        raise NoisyJacobianError(f"Jacobian changes by {change:.3g} under step halving")
    pb, rb = parameter_blocks(m), residual_blocks(m)
    reports = []

    def sub(r, cs):
        return J[rb[r]][:, np.r_[tuple(pb[c] for c in cs)]] if cs else np.zeros((0, 0))

    for r, zero_cols in DECLARED_ZERO.items():
        off = sub(r, zero_cols)
        worst = float(np.abs(off).max()) if off.size else 0.0
        reports.append(
            BlockReport(f"{r} off-blocks", off, float("nan"), worst, worst <= OFFBLOCK_TOL * norm)
        )

    A = sub("Z_minus", ("beta_minus_dot",))
    s = _sv(A)
    reports.append(BlockReport("dZ-/dbeta-", A, float(s.min()), 0.0, _rank(A) == m, {"rank": _rank(A)}))

    A = sub("Z_plus", ("beta_plus_dot",))
    s = _sv(A)
    reports.append(
        BlockReport("dZ+/dbeta+", A, float(s.min()), 0.0, _rank(A) == m - 1, {"rank": _rank(A)})
    )

    A = sub("V", ("gamma_dot",))
    s = _sv(A)
    U = v_block_unconstrained(m, step)
    su = _sv(U)
    expected = np.sort(np.concatenate([np.full(m - 1, 2 * math.pi), np.full(m - 1, 2.0)]))[::-1]
    reports.append(
        BlockReport(
            "dV/dgamma_dot",
            A,
            float(s.min()),
            0.0,
            bool(s.min() >= 1.9 and su.min() >= 1.9 and np.allclose(su, expected, atol=1e-6)),
            {"singular_values": s, "unconstrained": U, "unconstrained_singular_values": su},
        )
    )

    A = sub("H_B", ("p_plus_dot",))
    s = _sv(A)
    D, cr = hb_complex_derivative(m, step)
    pattern = np.zeros((m - 1, m))
    pattern[:, m - 1] = 0.5
    pattern[np.arange(m - 1), np.arange(m - 1)] = -0.5
    dev = float(np.abs(D - pattern).max())
    reports.append(
        BlockReport(
            "dH_B/dpdot+",
            A,
            float(s[: m - 1].min()),
            0.0,
            bool(_rank(A) == m - 1 and dev <= 1e-6),
            {"complex_derivative": D, "pattern_deviation": dev, "cauchy_riemann_defect": cr},
        )
    )

    cols = np.r_[pb["p_minus"].start : pb["p_minus"].stop - 1, pb["gamma_m"].start]
    A = J[rb["H_A"]][:, cols]
    s = _sv(A)
    H = ha_complex_derivative(m, step)
    p = np.array(ParameterVector.central(m).p_minus)
    last = p @ H
    target = np.zeros(m, dtype=complex)
    target[-1] = -2 * math.pi * m
    row_dev = float(np.abs(last - target).max())
    reports.append(
        BlockReport(
            "dH_A/d(p-, gamma_m)",
            A,
            float(s.min()),
            0.0,
            bool(_rank(A) == m and row_dev <= 1e-6),
            {"complex_derivative": H, "combined_last_row": last, "row_deviation": row_dev},
        )
    )

    sv = _sv(J)
    rank = int(np.sum(sv > RANK_TOL))
    reports.append(
        BlockReport(
            "full differential",
            J,
            float(sv[-1]),
            0.0,
            rank == J.shape[0],
            {"rank": rank, "rows": J.shape[0], "cols": J.shape[1]},
        )
    )
    return JacobianReport(m, J, reports, sv, J.shape[1] - rank, change)


# --------------------------------------------------------------------------
# the matrix A


@dataclass(frozen=True)
class MatrixA:
    m: int
    entries: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(1, self.m + 1) / self.m)


def build_matrix_A(m: int) -> MatrixA:
    if m < 2:
        raise ValueError("m must be at least 2")
    p = np.exp(2j * np.pi * np.arange(1, m + 1) / m)
    p[-1] = 1.0
    n = m - 1
    A = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i != j:
                A[i, j] = 2 / (p[i] - p[j]) ** 2
        A[i, i] = (m - 1) / p[i] ** 2 - sum(2 / (p[i] - p[j]) ** 2 for j in range(m) if j != i)
    return MatrixA(m, A)


def matrix_A_from_residuals(m: int, step: float = DEFAULT_STEP) -> np.ndarray:
    """A recovered from the holomorphic derivative of H^A in p^-, scaled by -1/(2 pi gamma^2)."""
    H = ha_complex_derivative(m, step)
    g = 1.0 / (m - 1)
    return H[: m - 1, : m - 1] / (-2 * math.pi * g * g)


@dataclass
class MatrixACertificate:
    m: int
    diagonal_abs: np.ndarray
    diagonal_expected: float
    margins: np.ndarray
    margins_expected: np.ndarray
    smallest_singular_value: float
    identity_defect: float

    @property
    def dominant(self) -> bool:
        return bool(np.all(self.margins > 0))

    def passed(self, diag_tol: float = 1e-9, margin_tol: float = 1e-10, identity_tol: float = 1e-12) -> bool:
        return bool(
            np.abs(self.diagonal_abs - self.diagonal_expected).max() <= diag_tol
            and np.abs(self.margins - self.margins_expected).max() <= margin_tol
            and self.dominant
            and self.smallest_singular_value > 0
            and self.identity_defect <= identity_tol
        )


def circle_identity_defect(points) -> float:
    """max |1 - 2 Re(1/(1+z)^2) - 2/|1+z|^2| / max(1, 2/|1+z|^2) over unit-modulus z.

    Both sides blow up as z -> -1, so the defect is measured relative to
    their size there.
    """
    z = np.asarray(points, dtype=complex)
    lhs = 1 - 2 * np.real(1 / (1 + z) ** 2)
    rhs = 2 / np.abs(1 + z) ** 2
    return float((np.abs(lhs - rhs) / np.maximum(1.0, rhs)).max())


def certify_matrix_A(A: MatrixA, samples: int = 100, seed: int = 0) -> MatrixACertificate:
    m = A.m
    E = A.entries
    p = np.exp(2j * np.pi * np.arange(1, m + 1) / m)
    diag = np.abs(np.diag(E))
    off = np.abs(E).sum(axis=1) - diag
    margins = diag - off
    expected = 2 / np.abs(p[: m - 1] - 1) ** 2
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-math.pi, math.pi, samples)
    theta = theta[np.abs(np.abs(theta) - math.pi) > 1e-3]  # keep away from z = -1
    z = np.exp(1j * theta)
    return MatrixACertificate(
        m,
        diag,
        (m * m - 1) / 6,
        margins,
        expected,
        float(_sv(E).min()),
        circle_identity_defect(z),
    )

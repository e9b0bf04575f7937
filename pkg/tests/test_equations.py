import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodeglue.equations import (
    ParameterVector,
    full_residual,
    horizontal_A,
    horizontal_A_quadrature,
    label_zeros,
    parameter_blocks,
    residual_blocks,
    residual_periods,
    residual_Z_minus,
    residual_Z_plus,
)
from nodeglue.gluing import build_components, central_configuration


def near_central(m, seed, scale=1e-3):
    rng = np.random.default_rng(seed)
    x = ParameterVector.central(m).pack()
    return ParameterVector.unpack(x + scale * rng.normal(size=x.size), m)


def sigma_pair(m, i, value):
    """V-element with entry i set to value and its partner to the conjugate."""
    z = np.zeros(m - 1, dtype=complex)
    z[i] = value
    z[m - 2 - i] = np.conj(value)
    return z


def test_block_sizes():
    for m in range(2, 9):
        assert parameter_blocks(m)["p_plus_dot"].stop == 5 * m + 2
        assert residual_blocks(m)["H_B"].stop == 5 * m - 3
        assert ParameterVector.central(m).pack().size == 5 * m + 2
        assert full_residual(ParameterVector.central(m)).pack().size == 5 * m - 3


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.integers(0, 10**6))
def test_pack_round_trip(m, seed):
    x = np.random.default_rng(seed).normal(size=5 * m + 2)
    assert np.allclose(ParameterVector.unpack(x, m).pack(), x, atol=0)


def test_central_configuration_is_recovered():
    for m in (2, 3, 6):
        cfg = ParameterVector.central(m).configuration()
        ref = central_configuration(m)
        for name in ("beta_minus", "beta_plus", "p_minus", "p_plus", "gamma"):
            assert np.allclose(getattr(cfg, name), getattr(ref, name), atol=1e-15)


def test_label_zeros_m2():
    zs = label_zeros(build_components(central_configuration(2)).phi3_minus)
    assert np.allclose(zs.locations, [1j, -1j], atol=1e-12)


def test_label_zeros_m3_sigma_paired():
    zs = label_zeros(build_components(central_configuration(3)).phi3_minus).locations
    assert np.allclose(np.array(zs) ** 3, -2, atol=1e-10)
    assert zs[2] == pytest.approx(np.conj(zs[0]), abs=1e-12)
    assert abs(zs[1].imag) < 1e-12


def test_labels_follow_a_homotopy():
    m = 4
    X = ParameterVector.central(m)
    prev = label_zeros(build_components(X.configuration()).phi3_minus)
    start = np.array(prev.locations)
    target = X.p_minus + 1e-4 * np.array([1 + 1j, 1, 1 - 1j, 1])
    for s in np.linspace(0.1, 1.0, 10):
        Y = X.replace(p_minus=X.p_minus + s * (target - X.p_minus))
        cur = label_zeros(build_components(Y.configuration()).phi3_minus, previous=prev)
        # oracle: each label moves by at most the size of the perturbation scale
        assert np.abs(np.array(cur.locations) - np.array(prev.locations)).max() < 1e-4
        prev = cur
    assert np.abs(np.array(prev.locations) - start).max() < 1e-3


@pytest.mark.parametrize("m", range(2, 9))
def test_central_residual_vanishes(m):
    r = full_residual(ParameterVector.central(m))
    assert np.abs(r.Z_minus).max() <= 1e-9
    assert np.abs(r.Z_plus).max() <= 1e-9
    assert np.abs(r.H_A).max() <= 1e-9
    assert np.abs(r.V_A).max() <= 1e-9 and np.abs(r.V_B).max() <= 1e-9
    assert np.abs(r.H_B).max() <= 1e-9
    assert r.max_norm() <= 1e-9


def test_z_minus_is_linear_in_beta0():
    X = ParameterVector.central(2)

    def Z(h):
        b = np.zeros(3, dtype=complex)
        b[0] = h
        return residual_Z_minus(X.replace(beta_minus_dot=b))[0]

    z = Z(0.01)
    assert np.abs(z).max() > 1e-3
    deriv = (Z(1e-6) - Z(-1e-6)) / 2e-6
    assert np.abs(z - 0.01 * deriv).max() <= 1e-4 * np.abs(z).max()


def test_z_minus_ignores_plus_points():
    X = ParameterVector.central(3)
    Y = X.replace(p_plus_dot=np.array([0.01 + 0.02j, 0.01 - 0.02j, 0.03]))
    assert np.abs(residual_Z_minus(Y)[0]).max() <= 1e-9


def test_z_plus_central_is_zero():
    for m in (3, 5):
        zp = residual_Z_plus(ParameterVector.central(m))
        assert zp.size == m - 1 and np.abs(zp).max() <= 1e-12


def test_z_plus_after_beta_plus_perturbation():
    m = 3
    X = ParameterVector.central(m).replace(beta_plus_dot=np.array([0.01, 0.01, 0.0]))
    cfg = X.configuration()
    # oracle: numerators built directly with numpy
    P = np.zeros(m, dtype=complex)
    Q = np.zeros(m, dtype=complex)
    for i in range(m):
        others = [p for j, p in enumerate(cfg.p_plus) if j != i]
        P = P + cfg.beta_plus[i] * np.polynomial.polynomial.polyfromroots(others)
        Q = Q + cfg.gamma[i] * np.polynomial.polynomial.polyfromroots(others)
    P = P / P[-1]
    zeros = np.polynomial.polynomial.polyroots(Q)
    R = np.polynomial.polynomial.polyfromroots(zeros[np.abs(zeros) < 0.5])
    oracle = (P - R)[: m - 1]
    got = residual_Z_plus(X)
    assert np.abs(got).max() > 1e-4
    assert np.allclose(got, oracle, atol=1e-10)


def test_v_a_from_imaginary_gamma():
    m = 4
    X = ParameterVector.central(m).replace(gamma_dot=sigma_pair(m, 0, 0.01j))
    V_A, _, _, _ = residual_periods(X)
    expected = -2 * math.pi * np.imag(X.gamma[: m - 1])
    assert np.allclose(V_A, expected, atol=1e-12)
    assert V_A[0] == pytest.approx(-2 * math.pi * 0.01)


def test_v_b_formula():
    m = 5
    X = ParameterVector.central(m).replace(gamma_dot=sigma_pair(m, 1, 0.02 + 0.01j))
    _, _, V_B, _ = residual_periods(X)
    g = X.gamma
    assert np.allclose(V_B, -2 * (g[:-1] - g[-1]).real, atol=1e-15)


def test_h_b_linear_in_plus_points():
    # at central values H^B_i = (pdot_m - pdot_i)/2 to first order
    m = 3
    d = np.array([1e-6 + 2e-6j, 1e-6 - 2e-6j, 3e-6])
    _, _, _, H_B = residual_periods(ParameterVector.central(m).replace(p_plus_dot=d))
    assert np.allclose(H_B, 0.5 * (d[-1] - d[:-1]), atol=1e-10)


def test_summation_identity_at_gamma_one():
    m = 3
    X = ParameterVector.central(m).replace(gamma_m=1.0)
    H = horizontal_A(X.configuration())
    total = np.sum(np.array(X.p_minus) * H)
    assert total == pytest.approx(-6 * math.pi, abs=1e-8)
    assert total.real == pytest.approx(-18.84956, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.floats(0.1, 2.0))
def test_summation_identity(m, gm):
    X = ParameterVector.central(m).replace(gamma_m=gm)
    total = np.sum(np.array(X.p_minus) * horizontal_A(X.configuration()))
    oracle = -2 * math.pi * m * (m - 1) * gm**2 + 2 * math.pi * m * gm
    assert abs(total - oracle) <= 1e-8 * max(1.0, abs(oracle))


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_h_a_residues_match_quadrature(m, seed):
    cfg = near_central(m, seed, 1e-2).configuration()
    assert np.allclose(horizontal_A(cfg), horizontal_A_quadrature(cfg), atol=1e-8)


def test_scaling_direction_stays_a_solution():
    for m in (2, 3, 5):
        r = full_residual(ParameterVector.scaling_direction(m, 0.05))
        assert r.max_norm() <= 1e-8


def test_imaginary_gamma_pattern_in_full_residual():
    m = 3
    r = full_residual(ParameterVector.central(m).replace(gamma_dot=sigma_pair(m, 0, 0.01j)))
    assert np.allclose(r.V_A, [-2 * math.pi * 0.01, 2 * math.pi * 0.01], atol=1e-12)


@settings(max_examples=500, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**7))
def test_symmetry_relations_near_central(m, seed):
    r = full_residual(near_central(m, seed))
    assert r.symmetry_defect() <= 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_residual_is_smooth(m, seed):
    rng = np.random.default_rng(seed)
    x0 = ParameterVector.central(m).pack()
    d = rng.normal(size=x0.size)
    d /= np.linalg.norm(d)

    def F(x):
        return full_residual(ParameterVector.unpack(x, m)).pack()

    derivs = [(F(x0 + h * d) - F(x0 - h * d)) / (2 * h) for h in (1e-5, 1e-6)]
    assert np.linalg.norm(derivs[0] - derivs[1]) <= 1e-3 * np.linalg.norm(derivs[0])

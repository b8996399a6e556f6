import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cnls_lab.grid import Grid
from cnls_lab.solitons import (KAPPA, AnsatzError, SolitonParams, ansatz_parts,
                               asymptotic_identity_residual, build_ansatz, check_tail,
                               ground_state, lambda_profile, q_profile)


def test_peak_value(grid25):
    Q = ground_state(grid25)
    assert Q[grid25.N // 2] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert np.isrealobj(Q)


def test_scaled_mass(grid25):
    assert grid25.integrate(ground_state(grid25, 0.5) ** 2) == pytest.approx(2, abs=1e-10)


def test_peak_location():
    g = Grid(25, 4096)
    Q = ground_state(g, 1.0, center=3.0)
    assert g.x[np.argmax(Q)] == pytest.approx(3.0, abs=g.dx)


def test_rejects_nonpositive_c(grid25):
    with pytest.raises(ValueError):
        ground_state(grid25, 0.0)


def test_lambda_profile(grid25):
    LQ = lambda_profile(grid25)
    assert LQ[grid25.N // 2] == pytest.approx(math.sqrt(2))
    assert grid25.inner(LQ, ground_state(grid25)) == pytest.approx(2, abs=1e-10)


def test_asymptotic_identity(grid25):
    assert KAPPA == 2 * math.sqrt(2)
    assert asymptotic_identity_residual(grid25) <= 1e-12
    x = -5.0
    assert q_profile(x) == pytest.approx(KAPPA * math.exp(x) / (1 + math.exp(2 * x)), abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(-5, 5), st.floats(0.01, 10))
def test_ground_state_even(c, center, delta):
    lhs = q_profile(np.array([center + delta]) - center, c)
    rhs = q_profile(np.array([center - delta]) - center, c)
    assert abs(lhs[0] - rhs[0]) <= 1e-12


@pytest.mark.parametrize("c,omega", [(0.5, 0.375), (0.5, 0.0), (1.2, 0.3), (0.0, 0.1)])
def test_params_validated(c, omega):
    with pytest.raises(ValueError):
        SolitonParams(1.0, -1.0, c=c, omega=omega)


def test_default_split_ratio():
    p = SolitonParams.from_separation(12.0, 0.3, c=0.5, omega=0.3)
    assert p.sigma1 == pytest.approx(8.0)
    assert p.sigma2 == pytest.approx(-4.0)
    assert p.sigma == pytest.approx(12.0)
    assert p.beta == pytest.approx(0.3)
    # total momentum 2(c beta1 + beta2) of the bare solitons vanishes
    assert 0.5 * p.beta1 + p.beta2 == pytest.approx(0.0, abs=1e-15)


def test_tail_check():
    g = Grid(40, 1024)
    check_tail(g, 1.0, 5.0)
    with pytest.raises(AnsatzError):
        check_tail(g, 1.0, 5.0, -15.0)
    with pytest.raises(AnsatzError):
        check_tail(g, 0.5, 0.0)


def test_bare_ansatz_is_exact_product(grid80):
    p = SolitonParams(6.0, -6.0, 0.3, -0.2, 0.01, -0.02, c=0.5, omega=0.3)
    U, V = build_ansatz(grid80, p, t=1.5, correction=False)
    x = grid80.x
    assert np.array_equal(U, q_profile(x - 6, 0.5) * np.exp(1j * (0.25 * 1.5 + 0.3 + 0.01 * x)))
    assert np.array_equal(V, q_profile(x + 6) * np.exp(1j * (1.5 - 0.2 - 0.02 * x)))


def test_real_correction_without_phases(grid80, profile_A):
    p = SolitonParams.from_separation(12, c=0.5, omega=0.3)
    parts = ansatz_parts(grid80, p, profile_A)
    assert np.max(np.abs(parts.U.imag)) == 0
    assert np.max(np.abs(parts.P - q_profile(grid80.x - p.sigma1, 0.5))) == 0
    assert np.max(np.abs(parts.phi)) > 0


def test_correction_size_scales_with_separation(grid80, profile_A):
    ratios = []
    for s in (8, 10, 12, 14):
        p = SolitonParams.from_separation(s, c=0.5, omega=0.3)
        parts = ansatz_parts(grid80, p, profile_A)
        ratios.append(grid80.norm(parts.U - parts.P) * math.exp(0.5 * s))
    assert max(ratios) / min(ratios) < 1 + 1e-6


def _mass_excess(grid, profile, s):
    p = SolitonParams.from_separation(s, c=0.5, omega=0.3)
    U, _ = build_ansatz(grid, p, profile=profile)
    return grid.integrate(np.abs(U) ** 2) - 2


@pytest.mark.xfail(strict=True, reason=(
    "the O(e^{-c sigma}) correction adds 2<P,phi> + |phi|^2 ~ 40 sigma e^{-2c sigma} to the "
    "mass; at sigma = 12 that is 3.2e-3, above 1e-3 (it drops below 1e-3 from sigma = 14)"))
def test_mass_of_corrected_ansatz_sigma12(grid80, profile_A):
    assert abs(_mass_excess(grid80, profile_A, 12)) <= 1e-3


def test_mass_of_corrected_ansatz_rate(grid80, profile_A):
    scaled = [_mass_excess(grid80, profile_A, s) * math.exp(0.5 * s) ** 2 / s
              for s in (10, 12, 14, 16)]
    assert all(30 < v < 50 for v in scaled)
    assert abs(_mass_excess(grid80, profile_A, 14)) <= 1e-3


@settings(max_examples=20, deadline=None)
@given(st.floats(-math.pi, math.pi))
def test_phase_covariance(delta):
    g = Grid(40, 1024)
    prof = q_profile(g.x, 0.8) * 0.1
    p = SolitonParams(4.0, -4.0, 0.1, 0.2, 0.01, 0.0, c=0.8, omega=0.3)
    U0, V0 = build_ansatz(g, p, t=0.7, profile=prof)
    U1, V1 = build_ansatz(g, p.with_(gamma1=p.gamma1 + delta), t=0.7, profile=prof)
    assert np.max(np.abs(U1 - np.exp(1j * delta) * U0)) <= 1e-14
    assert np.array_equal(V0, V1)


def test_symmetric_ansatz_is_reflection_symmetric(grid80, profile_B):
    p = SolitonParams.from_separation(12, 0.01, c=1.0, omega=0.5, weight=0.5)
    U, V = build_ansatz(grid80, p, t=3.0, profile=profile_B, mode="symmetric")
    assert np.max(np.abs(U - grid80.reflect(V))) <= 1e-14


def test_symmetric_requires_c1(grid80, profile_A):
    p = SolitonParams.from_separation(12, c=0.5, omega=0.3)
    with pytest.raises(AnsatzError):
        build_ansatz(grid80, p, profile=profile_A, mode="symmetric")


def test_needs_profile(grid80):
    p = SolitonParams.from_separation(12, c=0.5, omega=0.3)
    with pytest.raises(ValueError):
        build_ansatz(grid80, p)
    with pytest.raises(AnsatzError):
        build_ansatz(grid80, SolitonParams(-1, 1, c=0.5, omega=0.3), correction=False)

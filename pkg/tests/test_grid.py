import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cnls_lab.grid import Grid, GridError
from cnls_lab.solitons import q_profile

from conftest import smooth_decaying


def test_nodes_and_wavenumbers():
    g = Grid(25, 64)
    assert g.x[0] == -25.0
    assert g.dx * g.N == pytest.approx(50.0, abs=0)
    assert np.allclose(np.sort(g.k), math.pi / 25 * np.arange(-32, 32))


@pytest.mark.parametrize("N", [0, 3, 100, 2.5])
def test_bad_sizes_rejected(N):
    with pytest.raises(GridError):
        Grid(10, N)


def test_bad_width_rejected():
    with pytest.raises(GridError):
        Grid(-1, 64)


def test_field_checks(grid25):
    with pytest.raises(GridError):
        grid25.integrate(np.ones(10))
    f = np.ones(grid25.N)
    f[3] = np.nan
    with pytest.raises(GridError):
        grid25.integrate(f)


def test_mass_of_Q(grid25):
    assert grid25.integrate(q_profile(grid25.x) ** 2) == pytest.approx(4, abs=1e-10)
    assert grid25.inner(q_profile(grid25.x), q_profile(grid25.x)) == pytest.approx(4, abs=1e-10)


def test_zero_field(grid25):
    assert grid25.integrate(np.zeros(grid25.N)) == 0


def test_exp_weighted_integral():
    g = Grid(80, 8192)
    val = g.integrate(np.exp(2 * 0.5 * g.x) * q_profile(g.x) ** 2)
    assert val == pytest.approx(2 * math.pi, abs=1e-8)


def test_exp_weighted_closed_form_against_scipy_quad():
    from scipy.integrate import quad
    for c in (0.2, 0.5, 0.8):
        val, _ = quad(lambda x: math.exp(2 * c * x) * 2 / math.cosh(x) ** 2, -200, 200,
                      limit=400, epsabs=1e-13)
        assert val == pytest.approx(4 * math.pi * c / math.sin(math.pi * c), rel=1e-10)


def test_inner_orthogonality_and_virial(grid25):
    Q = q_profile(grid25.x)
    assert grid25.inner(Q, 1j * Q) == 0
    Qp = grid25.derivative(Q, 1)
    assert grid25.inner(Qp, grid25.x * Q) == pytest.approx(-2, abs=1e-10)


def test_derivatives_of_Q(grid25):
    Q = q_profile(grid25.x)
    d1 = grid25.derivative(Q, 1)
    assert abs(d1[grid25.N // 2]) <= 1e-10
    d2 = grid25.derivative(Q, 2)
    assert np.max(np.abs(d2 - Q + Q ** 3)) <= 1e-8
    assert np.max(np.abs(grid25.derivative(np.full(grid25.N, 3.0), 1))) <= 1e-14
    assert np.isrealobj(d1)


def test_derivative_order_validation(grid25):
    with pytest.raises(ValueError):
        grid25.derivative(np.zeros(grid25.N), 4)


def test_reflection(grid25):
    f = np.exp(-(grid25.x - 1) ** 2)
    assert np.allclose(grid25.reflect(f), np.exp(-(grid25.x + 1) ** 2), atol=1e-14)


def test_shift_matches_translation():
    g = Grid(40, 4096)
    f = q_profile(g.x)
    assert np.max(np.abs(g.shift(f, 2.3) - q_profile(g.x - 2.3))) < 1e-12


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_parseval(seed):
    g = Grid(20, 512)
    f = smooth_decaying(g, np.random.default_rng(seed))
    a = g.integrate(np.abs(f) ** 2).real
    assert g.spectral_energy(f) == pytest.approx(a, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([1, 2, 3]))
def test_derivative_linear(seed, a, b, order):
    g = Grid(20, 512)
    rng = np.random.default_rng(seed)
    f, h = smooth_decaying(g, rng), smooth_decaying(g, rng)
    lhs = g.derivative(a * f + b * h, order)
    rhs = a * g.derivative(f, order) + b * g.derivative(h, order)
    scale = 1 + np.max(np.abs(rhs))
    # (ik)^3 amplifies rounding by kmax^3 ~ 5e5 on this grid
    assert np.max(np.abs(lhs - rhs)) <= 1e-15 * np.max(np.abs(g.k)) ** order * scale * 10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_derivative_integrates_to_zero(seed):
    g = Grid(20, 512)
    f = smooth_decaying(g, np.random.default_rng(seed))
    assert abs(g.integrate(g.derivative(f, 1))) <= 1e-12 * (1 + g.norm(f))

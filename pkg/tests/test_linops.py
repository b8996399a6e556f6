import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cnls_lab import linops
from cnls_lab.grid import Grid, GridError
from cnls_lab.solitons import q_profile, q_prime_profile

from conftest import smooth_decaying


@pytest.fixture(scope="module")
def grid40():
    return Grid(40, 4096)


def test_spectral_apply_examples(grid40):
    g = grid40
    Q, Qp = q_profile(g.x), q_prime_profile(g.x)
    assert g.norm(linops.apply(linops.Lminus(g), Q)) <= 1e-8
    assert g.norm(linops.apply(linops.Lplus(g), Qp)) <= 1e-8
    assert g.norm(linops.apply(linops.Lminus(g), g.x * Q) + 2 * Qp) <= 1e-8


def test_identity_suite_fd(grid25):
    res = linops.identity_residuals(grid25, "fd")
    assert set(res) == {"Lminus_Q", "Lplus_Qprime", "Lplus_LambdaQ", "Lminus_xQ"}
    assert max(res.values()) <= 1e-6


def test_apply_grid_mismatch(grid40):
    with pytest.raises(GridError):
        linops.apply(linops.Lplus(grid40), np.zeros(10))


def test_unknown_method(grid40):
    with pytest.raises(ValueError):
        linops.apply(linops.Lplus(grid40), np.zeros(grid40.N), "nope")


def test_lplus_ground_state_closed_form():
    # (-d2 + 1 - 6 sech^2) sech^2 = -3 sech^2, checked by hand-coded derivatives
    x = np.linspace(-10, 10, 2001)
    s = 1 / np.cosh(x)
    f = s ** 2
    f2 = 4 * s ** 2 * np.tanh(x) ** 2 - 2 * s ** 4
    assert np.max(np.abs(-f2 + f - 6 * s ** 2 * f + 3 * f)) < 1e-14


def test_min_eigenvalues(grid25):
    assert linops.min_eigenvalue(linops.Lminus(grid25)) == pytest.approx(0, abs=1e-6)
    assert linops.min_eigenvalue(linops.Lplus(grid25)) == pytest.approx(-3, abs=1e-6)


def test_eigenrelation():
    rep = linops.eigenrelation(Grid(60, 8192), 0.5, 0.28)
    assert rep["rho"] == pytest.approx(0.4, abs=1e-15)
    assert rep["relative_residual"] <= 1e-6
    assert rep["is_ground_state"]
    assert rep["min_eigenvalue"] == pytest.approx(0.09, abs=1e-6)


def test_solve_recovers_eigenfunction():
    # Q^0.4 decays like e^{-0.4|x|}, so the rhs needs a wide box to vanish at the edge
    g = Grid(80, 8192)
    op = linops.Lc(g, 0.5, 0.28)
    qr = q_profile(g.x) ** 0.4
    rhs = 0.09 * qr
    u = linops.solve(op, rhs)
    assert g.norm(u - qr) <= 1e-6


def test_solve_zero_and_linearity(grid80):
    op = linops.Lc(grid80, 0.5, 0.3)
    assert np.all(linops.solve(op, np.zeros(grid80.N)) == 0)
    rhs = linops.profile_forcing(grid80, 0.5, 0.3)
    u1 = linops.solve(op, rhs)
    u2 = linops.solve(op, 2 * rhs)
    assert np.max(np.abs(u2 - 2 * u1)) <= 1e-13 * np.max(np.abs(u1))


def test_solve_rejects_noncoercive(grid80):
    with pytest.raises(ValueError):
        linops.solve(linops.Lplus(grid80), np.zeros(grid80.N))
    with pytest.raises(ValueError):
        linops.solve(linops.Lc(grid80, 0.5, 0.4), np.zeros(grid80.N))


def test_solve_rejects_nondecaying_rhs(grid80):
    with pytest.raises(ValueError, match="decay"):
        linops.solve(linops.Lone(grid80, 0.5), np.ones(grid80.N))


def test_solve_A_domain(grid80):
    with pytest.raises(ValueError):
        linops.solve_A(1.0, 0.3, grid80)
    with pytest.raises(ValueError):
        linops.solve_A(0.5, 0.4, grid80)
    with pytest.raises(ValueError):
        linops.solve_B(1.0, grid80)


def test_profile_A(grid80, profile_A):
    g = grid80
    op = linops.Lc(g, 0.5, 0.3)
    rhs = linops.profile_forcing(g, 0.5, 0.3)
    assert linops.residual(op, profile_A, rhs) <= 1e-8
    # spectral cross-check of the same profile
    assert linops.residual(op, profile_A, rhs, "spectral") <= 1e-6
    assert g.inner(linops.apply(op, profile_A), profile_A) > 0
    assert np.max(np.abs(profile_A.imag if np.iscomplexobj(profile_A) else 0)) == 0


def test_profile_A_on_default_box():
    g = Grid(60, 8192)
    A = linops.solve_A(0.5, 0.3, g)
    rhs = linops.profile_forcing(g, 0.5, 0.3)
    assert linops.residual(linops.Lc(g, 0.5, 0.3), A, rhs) <= 1e-8


def test_profile_B_pointwise(grid80, profile_B):
    g = grid80
    op = linops.Lone(g, 0.5)
    rhs = linops.profile_forcing(g, 1.0, 0.5)
    assert linops.residual(op, profile_B, rhs) <= 1e-8
    mask = rhs > 1e-10
    ratio = linops.apply(op, profile_B, "fd")[mask] / rhs[mask]
    assert np.max(np.abs(ratio - 1)) < 1e-4


def test_decay_constants_stable_under_refinement():
    for solve, weight in (
        (lambda g: linops.solve_A(0.5, 0.3, g), lambda g: q_profile(g.x, 0.5)),
        (lambda g: linops.solve_B(0.5, g), lambda g: (1 + np.abs(g.x)) * q_profile(g.x)),
    ):
        cs = []
        for n in (4096, 8192):
            g = Grid(60, n)
            cs.append(linops.decay_constant(g, solve(g), weight(g)))
        assert abs(cs[1] / cs[0] - 1) <= 0.02


def test_forcing_is_overflow_free():
    g = Grid(400, 1 << 14)
    f = linops.profile_forcing(g, 0.9, 0.3)
    assert np.all(np.isfinite(f))
    x = 3.0
    exact = 0.9 * 2 * math.sqrt(2) * 0.3 * math.exp(0.9 * x) * 2 / math.cosh(x) ** 2
    j = np.argmin(np.abs(g.x - x))
    assert f[j] == pytest.approx(0.9 * 2 * math.sqrt(2) * 0.3 * math.exp(0.9 * g.x[j])
                                 * q_profile(g.x[j]) ** 2, rel=1e-13)
    assert exact > 0


@pytest.mark.parametrize("c,omega", [(0.3, 0.1), (0.5, 0.3), (0.5, 0.37), (0.8, 0.7), (1.0, 0.9)])
def test_Lc_positive_in_admissible_range(c, omega):
    g = Grid(60, 2048)
    assert linops.min_eigenvalue(linops.Lc(g, c, omega)) > 0


def test_Lc_crosses_zero_beyond_bound():
    g = Grid(60, 2048)
    # omega = c(c+1)/2 puts the ground state at c^2 - rho^2 = 0 with rho = c
    assert linops.min_eigenvalue(linops.Lc(g, 0.5, 0.45)) < 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["Lplus", "Lminus", "Lc", "Lone"]),
       st.sampled_from(["spectral", "fd", "dirichlet"]))
def test_self_adjoint(seed, kind, method):
    g = Grid(20, 1024)
    rng = np.random.default_rng(seed)
    f, h = smooth_decaying(g, rng), smooth_decaying(g, rng)
    op = linops.OperatorSpec(kind, g, 0.5, 0.3)
    lhs = g.inner(linops.apply(op, f, method), h)
    rhs = g.inner(f, linops.apply(op, h, method))
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([("Lc", 0.5, 0.3), ("Lone", 1.0, 0.6)]))
def test_solve_inverts_apply(seed, spec):
    g = Grid(20, 1024)
    f = smooth_decaying(g, np.random.default_rng(seed), complex_=False)
    op = linops.OperatorSpec(spec[0], g, spec[1], spec[2])
    back = linops.solve(op, linops.apply(op, f, "dirichlet"))
    assert g.norm(back - f) <= 1e-6 * g.norm(f)

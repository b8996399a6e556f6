"""Linearized Schrodinger operators around the ground state.

``L+ = -d2 + 1 - 3Q^2``, ``L- = -d2 + 1 - Q^2``, ``Lc = -d2 + c^2 - omega Q^2``
and ``L1 = -d2 + 1 - omega Q^2``.

Two discretizations share the nodes of a :class:`~cnls_lab.grid.Grid`:
the periodic spectral one (``apply(..., method="spectral")``) and a
fourth-order central difference with homogeneous Dirichlet data at ``x = -L``
and ``x = +L`` used for every linear solve and eigenvalue computation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky_banded, cho_solve_banded, solveh_banded

from .grid import Grid
from .solitons import KAPPA, q_prime_profile, q_profile

KINDS = ("Lplus", "Lminus", "Lc", "Lone")

# -f'' ~ (f[j-2] - 16 f[j-1] + 30 f[j] - 16 f[j+1] + f[j+2]) / (12 dx^2)
_D2_STENCIL = np.array([1.0, -16.0, 30.0, -16.0, 1.0]) / 12.0


class SolverError(RuntimeError):
    """A linear solve or eigen-iteration that did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    grid: Grid
    c: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "Lc" and self.c <= 0:
            raise ValueError(f"Lc needs c > 0, got {self.c!r}")

    @property
    def mass2(self) -> float:
        return self.c ** 2 if self.kind == "Lc" else 1.0

    @property
    def coupling(self) -> float:
        return {"Lplus": 3.0, "Lminus": 1.0}.get(self.kind, self.omega)

    def potential(self) -> np.ndarray:
        """Multiplicative potential ``V`` with ``op = -d2 + mass2 - V``."""
        return self.coupling * q_profile(self.grid.x) ** 2

    def is_coercive(self) -> bool:
        if self.kind == "Lc":
            return 0 < self.omega < 0.5 * self.c * (self.c + 1)
        if self.kind == "Lone":
            return 0 < self.omega < 1
        return False


def Lplus(grid):
    return OperatorSpec("Lplus", grid)


def Lminus(grid):
    return OperatorSpec("Lminus", grid)


def Lc(grid, c, omega):
    return OperatorSpec("Lc", grid, c=c, omega=omega)


def Lone(grid, omega):
    return OperatorSpec("Lone", grid, omega=omega)


_EXTRAP = np.array([5.0, -10.0, 10.0, -5.0, 1.0])


def _ghosted(f, extrapolate: bool) -> np.ndarray:
    """Pad ``f`` with two ghost nodes per side (zeros or quartic extrapolation)."""
    out = np.zeros(f.size + 4, dtype=f.dtype)
    out[2:-2] = f
    if extrapolate:
        out[1] = _EXTRAP @ f[:5]
        out[0] = _EXTRAP @ out[1:6]
        out[-2] = _EXTRAP @ f[::-1][:5]
        out[-1] = _EXTRAP @ out[-2:-7:-1]
    return out


def _fd_laplacian(f, dx, extrapolate):
    p = _ghosted(f, extrapolate)
    return sum(w * p[i:i + f.size] for i, w in enumerate(_D2_STENCIL)) / dx ** 2


def apply(op: OperatorSpec, f, method: str = "spectral") -> np.ndarray:
    """``-f'' + mass2*f - V*f``.

    ``method`` selects the second derivative:

    ``"spectral"``
        periodic Fourier multiplier;
    ``"fd"``
        fourth-order central differences with ghost values extrapolated from
        the samples, so fields that do not vanish at ``+-L`` are handled;
    ``"dirichlet"``
        the matrix factored by :func:`solve`: node 0 and the ghost nodes are
        zero and the value at node 0 is returned as 0.
    """
    g = op.grid
    f = np.asarray(g.check(f), dtype=np.result_type(g.check(f), float))
    V = op.potential()
    if method == "spectral":
        return -g.derivative(f, 2) + (op.mass2 - V) * f
    if method == "fd":
        return _fd_laplacian(f, g.dx, True) + (op.mass2 - V) * f
    if method == "dirichlet":
        out = np.zeros_like(f)
        out[1:] = _fd_laplacian(f[1:], g.dx, False) + (op.mass2 - V[1:]) * f[1:]
        return out
    raise ValueError(f"unknown method {method!r}")


def banded_matrix(op: OperatorSpec, shift: float = 0.0) -> np.ndarray:
    """Upper symmetric band storage of ``op - shift`` on nodes ``1..N-1``."""
    g = op.grid
    m = g.N - 1
    h2 = g.dx ** 2
    ab = np.empty((3, m))
    ab[0, :] = _D2_STENCIL[0] / h2
    ab[1, :] = _D2_STENCIL[1] / h2
    ab[2, :] = _D2_STENCIL[2] / h2 + op.mass2 - op.potential()[1:] - shift
    return ab


def _check_decay(grid: Grid, rhs, tol=1e-12):
    edge = max(abs(rhs[0]), abs(rhs[-1]))
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if edge > tol * scale:
        raise ValueError(
            f"right-hand side does not decay at the box edge: |rhs(+-L)| = {edge:.3e} "
            f"> {tol:.0e}; enlarge L (currently {grid.L})"
        )


def solve(op: OperatorSpec, rhs, rtol: float = 1e-8) -> np.ndarray:
    """Solve ``op u = rhs`` for a coercive ``Lc``/``Lone`` by banded Cholesky.

    Raises :class:`SolverError` if the relative difference residual exceeds
    ``rtol``.
    """
    if not op.is_coercive():
        raise ValueError(
            f"{op.kind} with c={op.c}, omega={op.omega} is outside its coercive range; "
            "solve supports Lc with 0 < omega < c(c+1)/2 and Lone with 0 < omega < 1"
        )
    g = op.grid
    rhs = g.check(rhs, "rhs")
    _check_decay(g, rhs)
    ab = banded_matrix(op)
    u = np.zeros(g.N, dtype=np.result_type(rhs, float))
    if np.iscomplexobj(rhs):
        u[1:] = solveh_banded(ab, rhs[1:].real) + 1j * solveh_banded(ab, rhs[1:].imag)
    else:
        u[1:] = solveh_banded(ab, rhs[1:])
    res = residual(op, u, rhs)
    if res > rtol:
        raise SolverError(f"{op.kind} solve residual {res:.3e} exceeds {rtol:.0e}", res)
    return u


def residual(op: OperatorSpec, u, rhs, method: str = "dirichlet") -> float:
    """``||op u - rhs|| / ||rhs||`` (absolute norm if ``rhs`` vanishes).

    Node 0 is a boundary node and is excluded.
    """
    g = op.grid
    r = apply(op, u, method)[1:] - np.asarray(rhs)[1:]
    num = np.sqrt(g.dx * np.sum(np.abs(r) ** 2))
    den = np.sqrt(g.dx * np.sum(np.abs(np.asarray(rhs)[1:]) ** 2))
    return float(num / den) if den > 0 else float(num)


def profile_forcing(grid: Grid, c: float, omega: float) -> np.ndarray:
    """``c*kappa*omega*e^{cx} Q^2``, evaluated without overflow."""
    x = grid.x
    # e^{cx} Q^2 = 8 e^{cx - 2|x|} / (1 + e^{-2|x|})^2
    ax = np.abs(x)
    return c * KAPPA * omega * 8.0 * np.exp(c * x - 2 * ax) / (1.0 + np.exp(-2 * ax)) ** 2


def solve_A(c: float, omega: float, grid: Grid) -> np.ndarray:
    """Profile ``A`` with ``Lc A = c kappa omega e^{cx} Q^2`` for ``0 < c < 1``."""
    if not 0 < c < 1:
        raise ValueError(
            f"solve_A requires 0 < c < 1, got c={c!r}; the c = 1 profile is solve_B"
        )
    bound = 0.5 * c * (c + 1)
    if not 0 < omega < bound:
        raise ValueError(f"omega must lie in (0, c(c+1)/2) = (0, {bound:g}), got {omega!r}")
    return solve(Lc(grid, c, omega), profile_forcing(grid, c, omega))


def solve_B(omega: float, grid: Grid) -> np.ndarray:
    """Profile ``B`` with ``L1 B = kappa omega e^x Q^2`` for ``0 < omega < 1``."""
    if not 0 < omega < 1:
        raise ValueError(f"solve_B requires 0 < omega < 1, got {omega!r}")
    return solve(Lone(grid, omega), profile_forcing(grid, 1.0, omega))


def decay_constant(grid: Grid, f, weight, margin: float = 5.0) -> float:
    """``sup |f|/weight`` over nodes with ``|x| <= L - margin``."""
    mask = np.abs(grid.x) <= grid.L - margin
    return float(np.max(np.abs(np.asarray(f)[mask]) / np.asarray(weight)[mask]))


def eigenpair(op: OperatorSpec, tol: float = 1e-8, max_iter: int = 5000,
              shift: float | None = None):
    """Smallest eigenvalue and normalized eigenvector of the difference operator.

    Shifted inverse iteration with a shift below the spectrum (by default
    ``mass2 - max V - 1/2``), so that ``op - shift`` is positive definite and
    is factored once. Stops when the Rayleigh quotient changes by less than
    ``tol`` relative to its size and the eigen-residual is below ``tol``.
    """
    g = op.grid
    if shift is None:
        shift = op.mass2 - float(np.max(op.potential())) - 0.5
    ab = banded_matrix(op, shift)
    try:
        factor = cholesky_banded(ab)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"shift {shift} is not below the spectrum of {op.kind}") from exc
    full = np.zeros(g.N)
    y = np.exp(-np.abs(g.x[1:]))
    y /= np.linalg.norm(y)
    lam_old = np.inf
    for it in range(1, max_iter + 1):
        z = cho_solve_banded((factor, False), y)
        y = z / np.linalg.norm(z)
        full[1:] = y
        hy = apply(op, full, "dirichlet")[1:]
        lam = float(y @ hy)
        res = float(np.linalg.norm(hy - lam * y))
        if abs(lam - lam_old) <= tol * max(1.0, abs(lam)) and res < tol:
            break
        lam_old = lam
    else:
        raise SolverError(
            f"inverse iteration for {op.kind} stagnated after {max_iter} steps "
            f"(eigen-residual {res:.3e})", res)
    vec = np.zeros(g.N)
    vec[1:] = y / math.sqrt(g.dx)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return lam, vec


def min_eigenvalue(op: OperatorSpec, tol: float = 1e-8) -> float:
    return eigenpair(op, tol)[0]


def identity_residuals(grid: Grid, method: str = "fd") -> dict:
    """L2 residuals of ``L- Q = 0``, ``L+ Q' = 0``, ``L+ Lambda Q = -2Q`` and
    ``L- (xQ) = -2Q'``."""
    x = grid.x
    Q = q_profile(x)
    Qp = q_prime_profile(x)
    LQ = Q + x * Qp
    lp, lm = Lplus(grid), Lminus(grid)
    return {
        "Lminus_Q": grid.norm(apply(lm, Q, method)),
        "Lplus_Qprime": grid.norm(apply(lp, Qp, method)),
        "Lplus_LambdaQ": grid.norm(apply(lp, LQ, method) + 2 * Q),
        "Lminus_xQ": grid.norm(apply(lm, x * Q, method) + 2 * Qp),
    }


def rho_from_omega(omega: float) -> float:
    """Positive root of ``omega = rho (rho + 1) / 2``."""
    return 0.5 * (math.sqrt(1 + 8 * omega) - 1)


def eigenrelation(grid: Grid, c: float, omega: float, method: str = "fd") -> dict:
    """Check ``Lc Q^rho = (c^2 - rho^2) Q^rho`` and compare with the smallest
    discrete eigenvalue of ``Lc``.

    ``Q^rho`` is positive, hence the ground state, so the smallest
    eigenvalue should coincide with ``c^2 - rho^2``.
    """
    rho = rho_from_omega(omega)
    lam = c * c - rho * rho
    qr = q_profile(grid.x) ** rho
    op = Lc(grid, c, omega)
    rel = grid.norm(apply(op, qr, method) - lam * qr) / grid.norm(qr)
    mu, vec = eigenpair(op)
    overlap = abs(grid.inner(vec, qr)) / (grid.norm(vec) * grid.norm(qr))
    return {"rho": rho, "eigenvalue": lam, "relative_residual": rel, "min_eigenvalue": mu,
            "ground_state_overlap": overlap, "is_ground_state": bool(np.all(qr > 0))}

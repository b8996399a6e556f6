"""Ground states, the scaling generator and the corrected two-soliton ansatz."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid

SQRT2 = np.sqrt(2.0)
#: Coefficient of the left tail, ``Q(x) = KAPPA*e^x - e^{2x} Q(x)``.
KAPPA = 2.0 * SQRT2

#: Required smallness of the soliton tail at the box edge.
TAIL_TOL = 1e-12


class AnsatzError(ValueError):
    """Parameters that cannot be turned into a valid two-soliton ansatz."""


def sech(z):
    z = np.abs(np.asarray(z, dtype=float))
    e = np.exp(-z)
    return 2.0 * e / (1.0 + e * e)


def q_profile(x, c: float = 1.0):
    """``Q_c(x) = c*sqrt(2)*sech(c x)``."""
    return c * SQRT2 * sech(c * np.asarray(x, dtype=float))


def q_prime_profile(x, c: float = 1.0):
    cx = c * np.asarray(x, dtype=float)
    return -c * c * SQRT2 * sech(cx) * np.tanh(cx)


def ground_state(grid: Grid, c: float = 1.0, center: float = 0.0) -> np.ndarray:
    if c <= 0:
        raise ValueError(f"amplitude c must be positive, got {c!r}")
    return q_profile(grid.x - center, c)


def lambda_profile(grid: Grid, c: float = 1.0) -> np.ndarray:
    """``Lambda Q_c = Q_c + x Q_c'`` on the grid."""
    x = grid.x
    return q_profile(x, c) + x * q_prime_profile(x, c)


def asymptotic_identity_residual(grid: Grid) -> float:
    """Sup over nodes ``x <= 0`` of ``|Q(x)(1 + e^{2x}) - KAPPA e^x|``."""
    x = grid.x[grid.x <= 0]
    return float(np.max(np.abs(q_profile(x) * (1.0 + np.exp(2 * x)) - KAPPA * np.exp(x))))


def tail_level(c: float, distance: float) -> float:
    """Size of ``Q_c`` at ``distance`` from its center."""
    return float(q_profile(distance, c))


def check_tail(grid: Grid, c: float, *centers: float, tol: float = TAIL_TOL) -> None:
    reach = max(abs(s) for s in centers) if centers else 0.0
    level = tail_level(c, grid.L - reach)
    if level >= tol:
        raise AnsatzError(
            f"domain too small: Q_c(L - max|sigma_i|) = {level:.3e} >= {tol:.0e} "
            f"(L={grid.L}, c={c}, max|sigma_i|={reach})"
        )


@dataclass(frozen=True)
class SolitonParams:
    """Modulation parameters of the two solitons plus ``(c, omega)``.

    ``sigma1``/``gamma1``/``beta1`` position, phase and velocity parameter of
    the ``Q_c`` soliton carried by ``u``; the ``2`` entries belong to the
    ``Q`` soliton carried by ``v``.
    """

    sigma1: float
    sigma2: float
    gamma1: float = 0.0
    gamma2: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    c: float = 1.0
    omega: float = 0.5

    def __post_init__(self):
        c, w = self.c, self.omega
        if not 0 < c <= 1:
            raise ValueError(f"c must lie in (0, 1], got {c!r}")
        bound = 0.5 * c * (c + 1)
        if not 0 < w < bound:
            raise ValueError(f"omega must lie in (0, c(c+1)/2) = (0, {bound:g}), got {w!r}")

    @property
    def sigma(self) -> float:
        return self.sigma1 - self.sigma2

    @property
    def beta(self) -> float:
        return self.beta1 - self.beta2

    @property
    def gamma(self) -> float:
        return self.gamma1 - self.gamma2

    @classmethod
    def from_separation(cls, sigma, beta=0.0, *, c, omega, gamma1=0.0, gamma2=0.0,
                        weight=None):
        """Split separation and relative velocity between the two solitons.

        The default weight ``1/(c+1)`` keeps the center of mass (and the total
        momentum) at zero: ``sigma1 = sigma/(c+1)``, ``sigma2 = -c*sigma/(c+1)``.
        """
        w = 1.0 / (c + 1.0) if weight is None else weight
        return cls(
            sigma1=w * sigma, sigma2=-(1.0 - w) * sigma,
            beta1=w * beta, beta2=-(1.0 - w) * beta,
            gamma1=gamma1, gamma2=gamma2, c=c, omega=omega,
        )

    def with_(self, **kw) -> "SolitonParams":
        return replace(self, **kw)


def phases(grid: Grid, params: SolitonParams, t: float = 0.0):
    """``exp(i Gamma_1)``, ``exp(i Gamma_2)`` with the absolute coordinate ``x``."""
    x = grid.x
    g1 = params.c ** 2 * t + params.gamma1 + params.beta1 * x
    g2 = t + params.gamma2 + params.beta2 * x
    return np.exp(1j * g1), np.exp(1j * g2)


@dataclass
class AnsatzParts:
    P: np.ndarray
    phi: np.ndarray
    R: np.ndarray
    psi: np.ndarray

    @property
    def U(self):
        return self.P + self.phi

    @property
    def V(self):
        return self.R + self.psi


def ansatz_parts(grid: Grid, params: SolitonParams, profile=None, t: float = 0.0,
                 mode: str = "nonsymmetric", correction: bool = True) -> AnsatzParts:
    """Pieces ``P, phi, R, psi`` of the approximate two-soliton solution.

    ``profile`` is the solved ``A`` (nonsymmetric) or ``B`` (symmetric), sampled
    on ``grid`` centered at the origin. In the symmetric mode ``psi`` uses
    ``B(sigma1 - x)``, the mirror image of ``phi``, so that ``U(x) = V(-x)``
    whenever ``sigma1 = -sigma2``.
    """
    if mode not in ("nonsymmetric", "symmetric"):
        raise ValueError(f"unknown ansatz mode {mode!r}")
    c = params.c
    if mode == "symmetric" and c != 1.0:
        raise AnsatzError("symmetric ansatz requires c = 1")
    s = params.sigma
    if s <= 0:
        raise AnsatzError(f"separation sigma1 - sigma2 must be positive, got {s}")
    check_tail(grid, c, params.sigma1, params.sigma2)
    e1, e2 = phases(grid, params, t)
    P = q_profile(grid.x - params.sigma1, c) * e1
    R = q_profile(grid.x - params.sigma2) * e2
    zero = np.zeros(grid.N, dtype=complex)
    if not correction:
        return AnsatzParts(P, zero, R, zero.copy())
    if profile is None:
        raise ValueError("a solved profile is required when correction=True")
    profile = np.real(grid.check(profile, "profile"))
    phi = np.exp(-c * s) * grid.shift(profile, params.sigma2) * e1
    if mode == "symmetric":
        psi = np.exp(-s) * grid.shift(grid.reflect(profile), params.sigma1) * e2
    else:
        psi = zero.copy()
    return AnsatzParts(P, phi, R, psi)


def build_ansatz(grid: Grid, params: SolitonParams, t: float = 0.0, profile=None,
                 mode: str = "nonsymmetric", correction: bool = True):
    """Return ``(U, V)``: ``U = P + phi`` and ``V = R`` (or ``R + psi``)."""
    parts = ansatz_parts(grid, params, profile, t, mode, correction)
    return parts.U, parts.V

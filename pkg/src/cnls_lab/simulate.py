"""Strang split-step propagator for the coupled cubic Schrodinger system

    i u_t + u_xx + (|u|^2 + omega |v|^2) u = 0
    i v_t + v_xx + (|v|^2 + omega |u|^2) v = 0

on a periodic grid. The linear substep is the exact Fourier multiplier
``exp(-i k^2 dt)``; the nonlinear substep is the exact pointwise phase
rotation (both moduli are invariant under it), so each component's mass is
conserved to rounding at every step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .grid import Grid
from .solitons import TAIL_TOL, tail_level

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """Numerical fault during propagation; carries the last good state."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


@dataclass
class SimState:
    grid: Grid
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.ascontiguousarray(self.grid.check(self.u, "u"), dtype=complex)
        self.v = np.ascontiguousarray(self.grid.check(self.v, "v"), dtype=complex)

    def copy(self) -> "SimState":
        return SimState(self.grid, self.t, self.u.copy(), self.v.copy())


@dataclass
class SimConfig:
    grid: Grid
    dt: float
    t_end: float
    omega: float
    snapshot_stride: int = 0
    sample_every: float = 1.0
    track: bool = True
    enforce_symmetry: bool = False
    dealias: bool = False
    c: float = 1.0
    tail_tol: float = TAIL_TOL

    def validate(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not 0 <= self.omega < 1:
            raise ValueError(f"omega must lie in [0, 1), got {self.omega!r}")
        if not self.sample_every > 0:
            raise ValueError("sample_every must be positive")
        ratio = self.sample_every / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError("sample_every must be an integer multiple of dt")
        return self

    @property
    def resonance_free(self) -> bool:
        """True when ``(1 + kmax^2) dt < pi``.

        Outside this band some Fourier mode's linear phase per step is
        within reach of a multiple of pi relative to the soliton phase and
        the splitting excites a slow parametric instability. Harmless over
        short runs, fatal over millions of steps.
        """
        kmax = math.pi * self.grid.N / (2.0 * self.grid.L)
        return (1.0 + kmax * kmax) * self.dt < math.pi


def _half_multiplier(grid: Grid, dt: float, dealias: bool) -> np.ndarray:
    m = np.exp(-0.5j * grid.k ** 2 * dt)
    if dealias:
        m = m * (np.abs(grid.k) <= (2.0 / 3.0) * np.max(np.abs(grid.k)))
    return m


def step(state: SimState, dt: float, omega: float, dealias: bool = False) -> SimState:
    """One Strang step: half linear, full nonlinear, half linear."""
    half = _half_multiplier(state.grid, dt, dealias)
    u = np.fft.ifft(half * np.fft.fft(state.u))
    v = np.fft.ifft(half * np.fft.fft(state.v))
    _kernels.nonlinear_phase(u, v, omega, dt)
    u = np.fft.ifft(half * np.fft.fft(u))
    v = np.fft.ifft(half * np.fft.fft(v))
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise SimulationError(f"non-finite field at t = {state.t + dt}", state)
    return SimState(state.grid, state.t + dt, u, v)


def advance(state: SimState, dt: float, nsteps: int, omega: float,
            dealias: bool = False, symmetrize: bool = False) -> SimState:
    """``nsteps`` Strang steps with adjacent half linear steps merged.

    Equal to repeated :func:`step` up to rounding. ``symmetrize`` projects
    onto ``u(x) = v(-x)`` after every step.
    """
    if nsteps <= 0:
        return state.copy()
    g = state.grid
    half = _half_multiplier(g, dt, dealias)
    full = half * half
    ridx = g.reflect_index
    uh = half * np.fft.fft(state.u)
    vh = half * np.fft.fft(state.v)
    for n in range(nsteps):
        u = np.fft.ifft(uh)
        v = np.fft.ifft(vh)
        _kernels.nonlinear_phase(u, v, omega, dt)
        if symmetrize:
            u = 0.5 * (u + v[ridx])
            v = u[ridx]
        if n % 256 == 0 and not np.isfinite(u[0] + v[0] + np.sum(u).real):
            raise SimulationError(f"non-finite field near t = {state.t + (n + 1) * dt}", state)
        mult = half if n == nsteps - 1 else full
        uh = mult * np.fft.fft(u)
        vh = mult * np.fft.fft(v)
    u = np.fft.ifft(uh)
    v = np.fft.ifft(vh)
    if symmetrize:
        u = 0.5 * (u + v[ridx])
        v = u[ridx].copy()
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise SimulationError(f"non-finite field at t = {state.t + nsteps * dt}", state)
    return SimState(g, state.t + nsteps * dt, u, v)


def conserved(state: SimState, omega: float):
    """``(mass_u, mass_v, energy, momentum)`` by spectral quadrature."""
    g = state.grid
    u, v = state.u, state.v
    ux, vx = g.derivative(u, 1), g.derivative(v, 1)
    au, av = np.abs(u) ** 2, np.abs(v) ** 2
    mass_u = float(g.integrate(au))
    mass_v = float(g.integrate(av))
    kinetic = 0.5 * float(g.integrate(np.abs(ux) ** 2 + np.abs(vx) ** 2))
    potential = 0.25 * float(g.integrate(au * au + av * av + 2 * omega * au * av))
    momentum = float(np.imag(g.integrate(ux * np.conj(u) + vx * np.conj(v))))
    return mass_u, mass_v, kinetic - potential, momentum


@dataclass
class RunResult:
    record: "TrajectoryRecord"
    snapshots: list = field(default_factory=list)
    final: SimState | None = None
    halted: bool = False
    halt_reason: str = ""
    symmetry_defect: float = 0.0


def run(config: SimConfig, initial: SimState, predict=None, progress=None) -> RunResult:
    """Propagate ``initial`` to ``config.t_end``, sampling every ``sample_every``.

    The last sample lands on the first grid time ``>= t_end``. At each
    sample the soliton centers are tracked (if enabled) together with
    the conserved quantities; ``predict(t)`` supplies ``y_pred``. Every
    ``snapshot_stride``-th sample is kept as a snapshot. A tracked soliton
    closer to the box edge than the tail tolerance allows halts the run.
    """
    from .tracking import TrackingError, TrajectoryRecord, find_centers

    config.validate()
    nsub = int(round(config.sample_every / config.dt))
    total = int(math.ceil((config.t_end - initial.t) / config.dt - 1e-9))
    nsamples = -(-total // nsub) if total > 0 else 0
    if total > 100_000 and not config.resonance_free:
        log.warning("dt = %g on N = %d, L = %g is inside the splitting resonance band; "
                    "long runs may go unstable", config.dt, initial.grid.N, initial.grid.L)
    rec = TrajectoryRecord.empty()
    result = RunResult(rec)
    state = initial.copy()
    g = state.grid

    def sample(st):
        s1 = s2 = float("nan")
        if config.track:
            s1, s2 = find_centers(st, config.c)
        mu, mv, en, mo = conserved(st, config.omega)
        yp = float(predict(st.t)) if predict is not None else float("nan")
        rec.append(st.t, s1, s2, mu, mv, en, mo, yp)
        if config.enforce_symmetry:
            result.symmetry_defect = max(result.symmetry_defect,
                                         float(np.max(np.abs(st.u - st.v[g.reflect_index]))))
        return s1, s2

    try:
        sample(state)
        if config.snapshot_stride:
            result.snapshots.append(state.copy())
        for i in range(1, nsamples + 1):
            nstep = min(nsub, total - (i - 1) * nsub)
            state = advance(state, config.dt, nstep, config.omega, config.dealias,
                            config.enforce_symmetry)
            s1, s2 = sample(state)
            if config.snapshot_stride and i % config.snapshot_stride == 0:
                result.snapshots.append(state.copy())
            if config.track:
                reach = max(abs(s1), abs(s2))
                if tail_level(config.c, g.L - reach) >= config.tail_tol:
                    result.halted = True
                    result.halt_reason = (
                        f"soliton at {reach:.3f} too close to the box edge at t = {state.t:.6g}")
                    break
            if progress is not None:
                progress(i, nsamples, state)
    except TrackingError as exc:
        result.halted, result.halt_reason = True, f"tracking failure: {exc}"
    except SimulationError as exc:
        result.halted, result.halt_reason = True, str(exc)
        state = exc.last_state or state
    result.final = state
    return result


def boost(state: SimState, beta: float) -> SimState:
    """Galilean boost of the data: multiply both components by ``e^{i beta x}``."""
    ph = np.exp(1j * beta * state.grid.x)
    return SimState(state.grid, state.t, state.u * ph, state.v * ph)


def rescale(state: SimState, lam: float) -> SimState:
    """``lam * f(lam x)`` on the grid shrunk by ``lam`` (same node values)."""
    g = Grid(state.grid.L / lam, state.grid.N)
    return SimState(g, state.t / lam ** 2, lam * state.u, lam * state.v)


def with_time(state: SimState, t: float) -> SimState:
    return replace(state.copy(), t=t)

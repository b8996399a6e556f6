"""Reduced modulation dynamics of the soliton separation.

Three models share the state ``(sigma, beta, gamma, gamma_dot)`` with
``sigma_dot = 2 beta``:

* ``nonsym``: ``sigma'' = -2(c+1) alpha_c e^{-2c sigma}``
* ``sym``:    ``sigma'' = -4 alpha sigma e^{-2 sigma}``
* ``book``:   ``gamma'' = c_gamma e^{-sigma} sin(gamma)``,
  ``sigma'' = -c_sigma e^{-sigma} cos(gamma)``

The book system is integrated in these real variables. For
``c_gamma = c_sigma = k`` it is ``Y'' = -k e^{-Y}`` with ``Y = sigma + i gamma``
(note the sign of the exponent); no complex-form integrator is provided.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

MODEL_CODES = {"nonsym": _kernels.NONSYM, "sym": _kernels.SYM, "book": _kernels.BOOK}
HALT_REASONS = {_kernels.OK: "", _kernels.HALT_FLOOR: "collision",
                _kernels.HALT_NONFINITE: "non-finite state"}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    c: float = 1.0
    alpha: float = 0.0
    c_gamma: float = 0.0
    c_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_CODES:
            raise ValueError(f"unknown model {self.kind!r}")
        if self.kind in ("nonsym", "sym") and not self.alpha > 0:
            raise ValueError(f"{self.kind} model needs alpha > 0, got {self.alpha!r}")
        if self.kind == "nonsym" and not self.c > 0:
            raise ValueError(f"nonsym model needs c > 0, got {self.c!r}")
        if self.kind == "book" and not (self.c_gamma > 0 and self.c_sigma > 0):
            raise ValueError("book model needs c_gamma > 0 and c_sigma > 0")

    @classmethod
    def nonsym(cls, c, alpha_c):
        return cls("nonsym", c=c, alpha=alpha_c)

    @classmethod
    def sym(cls, alpha):
        return cls("sym", alpha=alpha)

    @classmethod
    def book(cls, c_gamma, c_sigma):
        return cls("book", c_gamma=c_gamma, c_sigma=c_sigma)

    @property
    def capital_omega(self) -> float:
        if self.kind == "nonsym":
            return math.sqrt(2 * self.c * (self.c + 1) * self.alpha)
        if self.kind == "sym":
            return math.sqrt(4 * self.alpha)
        raise ValueError("book model has no Omega")

    def _kernel_params(self):
        if self.kind == "nonsym":
            return (self.c + 1) * self.alpha, self.c
        if self.kind == "sym":
            return self.alpha, 0.0
        return self.c_gamma, self.c_sigma


@dataclass(frozen=True)
class ReducedState:
    sigma: float
    beta: float
    gamma: float = 0.0
    gamma_dot: float = 0.0

    def as_array(self):
        return np.array([self.sigma, self.beta, self.gamma, self.gamma_dot], dtype=float)


@dataclass
class Trajectory:
    model: ModelSpec
    t: np.ndarray
    states: np.ndarray  # columns sigma, beta, gamma, gamma_dot
    halted: bool = False
    reason: str = ""
    steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def sigma(self):
        return self.states[:, 0]

    @property
    def beta(self):
        return self.states[:, 1]

    @property
    def gamma(self):
        return self.states[:, 2]

    @property
    def gamma_dot(self):
        return self.states[:, 3]

    def final(self) -> ReducedState:
        return ReducedState(*self.states[-1])

    def first_integral(self):
        return first_integral(self.model, self.states)


def integrate(model: ModelSpec, state0: ReducedState, t0: float, t1: float, dt: float,
              stride: int = 1, floor: float = -30.0, backend=None) -> Trajectory:
    """Classical RK4 with fixed step from ``t0`` to ``t1``.

    The step is adjusted down so that an integer number of steps lands on
    ``t1``. Integration halts (``halted=True``) when ``sigma < floor`` or the
    state stops being finite, which is how collisions show up.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    nsteps = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / nsteps
    kern = backend or _kernels
    p0, p1 = model._kernel_params()
    ts, ys, status, done = kern.rk4(MODEL_CODES[model.kind], p0, p1, state0.as_array(),
                                    float(t0), h, int(nsteps), int(stride), float(floor))
    return Trajectory(model, ts, ys, halted=status != _kernels.OK,
                      reason=HALT_REASONS[status], steps=int(done), meta={"dt": h})


def integrate_stretched(model: ModelSpec, state0: ReducedState, t0: float, t1: float,
                        rel_step: float = 1e-3, ratio: float = 2.0, samples: int = 50,
                        floor: float = -30.0, backend=None) -> Trajectory:
    """RK4 with a step proportional to ``t``, restarted on ``[tau, ratio*tau]``.

    Reaches ``t1/t0 = 10^3`` with ``O(log(t1/t0)/rel_step)`` steps. ``t0``
    must be positive. About ``samples`` states are kept per segment.
    """
    if not t0 > 0:
        raise ValueError("stretched integration needs t0 > 0")
    ts, ys = [np.array([t0])], [state0.as_array()[None, :]]
    tau, state, steps = t0, state0, 0
    halted, reason = False, ""
    while tau < t1 * (1 - 1e-12):
        end = min(tau * ratio, t1)
        n = max(1, math.ceil((end - tau) / (rel_step * tau)))
        stride = max(1, n // samples)
        seg = integrate(model, state, tau, end, (end - tau) / n, stride, floor, backend)
        ts.append(seg.t[1:])
        ys.append(seg.states[1:])
        steps += seg.steps
        if seg.halted:
            halted, reason = True, seg.reason
            break
        tau, state = end, seg.final()
    return Trajectory(model, np.concatenate(ts), np.vstack(ys), halted, reason, steps,
                      meta={"rel_step": rel_step})


def first_integral(model: ModelSpec, state) -> np.ndarray | float:
    """Conserved quantity of the nonsym (``g``) or sym (``H``) flow.

    ``g = beta^2 - ((1+c) alpha_c / 2c) e^{-2c sigma}`` and
    ``H = 2 beta^2 - alpha (2 sigma + 1) e^{-2 sigma}``.
    """
    arr = state.as_array() if isinstance(state, ReducedState) else np.asarray(state, float)
    s, b = arr[..., 0], arr[..., 1]
    if model.kind == "nonsym":
        c, a = model.c, model.alpha
        out = b * b - (1 + c) * a / (2 * c) * np.exp(-2 * c * s)
    elif model.kind == "sym":
        out = 2 * b * b - model.alpha * (2 * s + 1) * np.exp(-2 * s)
    else:
        raise ValueError("no first integral is implemented for the book model")
    return float(out) if np.ndim(out) == 0 else out


def nonsym_exact(model: ModelSpec, t):
    """``sigma = log(Omega_c t)/c`` and ``beta = 1/(2ct)``, an exact solution."""
    t = np.asarray(t, float)
    return np.log(model.capital_omega * t) / model.c, 1.0 / (2 * model.c * t)


def sym_formal(model: ModelSpec, t):
    """Approximate solution ``log t + log log t / 2 + log Omega`` and half its derivative."""
    t = np.asarray(t, float)
    lt = np.log(t)
    sigma = lt + 0.5 * np.log(lt) + math.log(model.capital_omega)
    beta = 0.5 * (1.0 / t + 0.5 / (t * lt))
    return sigma, beta


def sym_separatrix_beta(alpha: float, sigma: float, kappa: float = 0.0) -> float:
    """Zero-energy velocity for the force ``sigma'' = -4(alpha sigma + kappa) e^{-2 sigma}``.

    ``beta^2 = (alpha sigma + alpha/2 + kappa) e^{-2 sigma}``; with ``kappa = 0``
    this is ``H = 0``. Slower data are eventually captured, faster data escape
    with a limiting speed; only the separatrix follows the log-log law.
    """
    return math.sqrt(alpha * sigma + 0.5 * alpha + kappa) * math.exp(-sigma)


@dataclass
class SeparatrixFit:
    """Effective sym dynamics fitted to a measured separation history.

    The model is ``sigma'' = -4(alpha sigma + kappa) e^{-2 sigma}`` started at
    ``(sigma0 + sigma_shift, beta0 (1 + beta_scale))``.
    """
    alpha: float
    kappa: float
    sigma_shift: float
    beta_scale: float
    residual_rms: float
    sigma0: float
    beta0: float

    @property
    def beta_separatrix(self) -> float:
        """Commanded initial velocity that lands the realized one on the separatrix."""
        sep = sym_separatrix_beta(self.alpha, self.sigma0 + self.sigma_shift, self.kappa)
        return sep / (1 + self.beta_scale)

    @property
    def energy_deficit(self) -> float:
        """``beta0 / beta_separatrix - 1``; negative means the data would be captured."""
        return self.beta0 / self.beta_separatrix - 1

    def as_dict(self):
        return {"alpha": self.alpha, "kappa": self.kappa, "sigma_shift": self.sigma_shift,
                "beta_scale": self.beta_scale, "residual_rms": self.residual_rms,
                "beta0": self.beta0, "beta_separatrix": self.beta_separatrix,
                "energy_deficit": self.energy_deficit}


def fit_sym_effective(times, y, alpha: float, beta0: float, kappa0: float = 0.0) -> SeparatrixFit:
    """Fit ``(kappa, sigma_shift, beta_scale)`` of the effective sym flow to ``y(times)``.

    Used to shoot for the separatrix: the PDE realizes slightly different
    initial data and force than the ansatz parameters say, and the log-log
    regime is unstable to both.
    """
    from scipy.integrate import solve_ivp
    from scipy.optimize import least_squares

    t = np.asarray(times, float)
    y = np.asarray(y, float)
    if t.size < 10 or np.any(np.diff(t) <= 0):
        raise ValueError("need at least 10 strictly increasing samples")
    s0 = float(y[0])

    def model(p):
        kap = kappa0 + p[2]
        rhs = lambda _, z: (2 * z[1], -2 * (alpha * z[0] + kap) * math.exp(-2 * z[0]))
        sol = solve_ivp(rhs, (t[0], t[-1]), (s0 + p[1], beta0 * (1 + p[0])), t_eval=t,
                        rtol=1e-12, atol=1e-16)
        if not sol.success or sol.y.shape[1] != t.size:
            return np.full(t.size, 1e3)
        return sol.y[0] - y

    res = least_squares(model, (0.0, 0.0, 0.0), x_scale=(1e-3, 1e-3, 0.1))
    rms = float(np.sqrt(np.mean(res.fun ** 2)))
    return SeparatrixFit(alpha, kappa0 + float(res.x[2]), float(res.x[1]), float(res.x[0]),
                         rms, s0, beta0)


def book_gamma0_exact(k, t):
    """``sigma = log(k t^2 / 2)`` solves ``sigma'' = -k e^{-sigma}``."""
    return np.log(k * np.asarray(t, float) ** 2 / 2)


@dataclass
class RegimeResult:
    label: str
    diagnostics: dict

    def __str__(self):
        return self.label


def _loglog_slope(t, s):
    lt = np.log(t)
    A = np.vstack([lt, np.ones_like(lt)]).T
    coef, *_ = np.linalg.lstsq(A, s, rcond=None)
    return float(coef[0]), float(np.sqrt(np.mean((A @ coef - s) ** 2)))


def classify_regime(traj: Trajectory, min_decades: float = 3.0,
                    min_periods: int = 20) -> RegimeResult:
    """Label a trajectory as ``divergent_linear``, ``logarithmic``,
    ``bounded_oscillatory`` or ``inconclusive``.

    Oscillation is read off sign changes of ``sigma_dot``; divergence is
    told apart from logarithmic growth by how much ``sigma_dot`` decays over
    the last decade of time (constant for linear growth, ``~1/t`` for
    logarithmic growth).
    """
    t, s, b = traj.t, traj.sigma, traj.beta
    nz = b[b != 0]
    flips = int(np.count_nonzero(np.signbit(nz[1:]) != np.signbit(nz[:-1])))
    diag = {
        "halted": traj.halted, "reason": traj.reason, "sign_changes": flips,
        "periods": flips / 2.0, "t_span": [float(t[0]), float(t[-1])],
        "sigma_min": float(np.min(s)), "sigma_max": float(np.max(s)),
    }
    if traj.halted:
        diag["why"] = f"integration halted ({traj.reason})"
        return RegimeResult("inconclusive", diag)
    decades = math.log10(t[-1] / t[0]) if t[0] > 0 else math.log10(t[-1] - t[0] + 1)
    diag["decades"] = decades
    half = t >= t[0] + 0.5 * (t[-1] - t[0])
    range_first = float(np.ptp(s[~half])) if np.any(~half) else 0.0
    range_second = float(np.ptp(s[half]))
    diag["range_first_half"] = range_first
    diag["range_second_half"] = range_second
    if flips >= 2 * min_periods:
        if range_second <= 1.5 * range_first + 1e-12 and np.all(np.isfinite(s)):
            return RegimeResult("bounded_oscillatory", diag)
        diag["why"] = "oscillating but range growing"
        return RegimeResult("inconclusive", diag)
    if decades < min_decades:
        diag["why"] = f"spans {decades:.2f} decades (< {min_decades}) and {flips / 2:.1f} periods"
        return RegimeResult("inconclusive", diag)
    t_end = t[-1]
    last = t >= t_end / 10.0
    v_end = 2 * b[-1]
    i_mid = int(np.searchsorted(t, t_end / 10.0))
    v_mid = 2 * b[i_mid]
    slope, rms = _loglog_slope(t[last], s[last])
    diag.update(velocity_end=float(v_end), velocity_decade_before=float(v_mid),
                log_slope=slope, log_fit_rms=rms)
    if v_end <= 0 or v_mid <= 0:
        diag["why"] = "separation not increasing at the end"
        return RegimeResult("inconclusive", diag)
    decay = v_end / v_mid
    diag["velocity_ratio"] = float(decay)
    if decay > 0.5:
        return RegimeResult("divergent_linear", diag)
    if decay < 0.2 and slope > 0:
        return RegimeResult("logarithmic", diag)
    diag["why"] = f"velocity ratio {decay:.3f} over the last decade is ambiguous"
    return RegimeResult("inconclusive", diag)


def regime_scan(model: ModelSpec, starts, t0: float, t1: float, dt: float,
                stride: int = 10, floor: float = -30.0, backend=None, **classify_kw):
    """Integrate and classify every start; returns ``[(state0, RegimeResult)]``."""
    out = []
    for s in starts:
        s = s if isinstance(s, ReducedState) else ReducedState(*s)
        traj = integrate(model, s, t0, t1, dt, stride, floor, backend)
        out.append((s, classify_regime(traj, **classify_kw)))
    return out


def label_counts(results) -> dict:
    counts = {}
    for _, r in results:
        counts[r.label] = counts.get(r.label, 0) + 1
    return counts

"""Pure-Python/numpy versions of the hot kernels (reference and fallback)."""
import math

import numpy as np

NONSYM, SYM, BOOK = 0, 1, 2
OK, HALT_FLOOR, HALT_NONFINITE = 0, 1, 2


def nonlinear_phase(u, v, omega, dt):
    """In place: ``u *= exp(i(|u|^2 + omega|v|^2) dt)`` and the mirror update of ``v``."""
    au = u.real * u.real + u.imag * u.imag
    av = v.real * v.real + v.imag * v.imag
    u *= np.exp(1j * (au + omega * av) * dt)
    v *= np.exp(1j * (av + omega * au) * dt)


def _rhs(model, p0, p1, y):
    s, b, g, gd = y
    if model == NONSYM:
        # p0 = (c+1) alpha_c, p1 = c
        return (2.0 * b, -p0 * math.exp(-2.0 * p1 * s), 0.0, 0.0)
    if model == SYM:
        # p0 = alpha
        return (2.0 * b, -2.0 * p0 * s * math.exp(-2.0 * s), 0.0, 0.0)
    # book: p0 = c_gamma, p1 = c_sigma; b = sigma_dot / 2
    e = math.exp(-s)
    return (2.0 * b, -0.5 * p1 * e * math.cos(g), gd, p0 * e * math.sin(g))


def rk4(model, p0, p1, y0, t0, dt, nsteps, stride, floor):
    """Fixed-step classical RK4 on the state ``(sigma, beta, gamma, gamma_dot)``.

    Returns ``(times, states, status, steps_done)``; samples every ``stride``
    steps and always the last state reached.
    """
    y = [float(v) for v in y0]
    nsave = nsteps // stride + 2
    ts = np.empty(nsave)
    ys = np.empty((nsave, 4))
    ts[0] = t0
    ys[0] = y
    k = 1
    status = OK
    t = t0
    done = 0
    h2 = 0.5 * dt
    for n in range(1, nsteps + 1):
        try:
            k1 = _rhs(model, p0, p1, y)
            k2 = _rhs(model, p0, p1, [y[i] + h2 * k1[i] for i in range(4)])
            k3 = _rhs(model, p0, p1, [y[i] + h2 * k2[i] for i in range(4)])
            k4 = _rhs(model, p0, p1, [y[i] + dt * k3[i] for i in range(4)])
        except OverflowError:
            status = HALT_NONFINITE
            break
        y = [y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(4)]
        t = t0 + n * dt
        done = n
        if not all(math.isfinite(v) for v in y):
            status = HALT_NONFINITE
            break
        if y[0] < floor:
            status = HALT_FLOOR
            break
        if n % stride == 0:
            ts[k] = t
            ys[k] = y
            k += 1
    if done % stride != 0 or status != OK:
        ts[k] = t
        ys[k] = y
        k += 1
    return ts[:k].copy(), ys[:k].copy(), status, done

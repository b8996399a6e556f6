# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same signatures as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sin, cos, isfinite

cnp.import_array()

cdef int NONSYM = 0, SYM = 1, BOOK = 2
cdef int OK = 0, HALT_FLOOR = 1, HALT_NONFINITE = 2


def nonlinear_phase(double complex[::1] u, double complex[::1] v, double omega, double dt):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double au, av, pu, pv, ur, ui, vr, vi, cu, su, cv, sv
    if v.shape[0] != n:
        raise ValueError("u and v must have the same length")
    for i in range(n):
        ur = u[i].real; ui = u[i].imag
        vr = v[i].real; vi = v[i].imag
        au = ur * ur + ui * ui
        av = vr * vr + vi * vi
        pu = (au + omega * av) * dt
        pv = (av + omega * au) * dt
        cu = cos(pu); su = sin(pu)
        cv = cos(pv); sv = sin(pv)
        u[i] = (ur * cu - ui * su) + 1j * (ur * su + ui * cu)
        v[i] = (vr * cv - vi * sv) + 1j * (vr * sv + vi * cv)


cdef inline void _rhs(int model, double p0, double p1, double* y, double* out) nogil:
    cdef double e
    if model == NONSYM:
        out[0] = 2.0 * y[1]
        out[1] = -p0 * exp(-2.0 * p1 * y[0])
        out[2] = 0.0
        out[3] = 0.0
    elif model == SYM:
        out[0] = 2.0 * y[1]
        out[1] = -2.0 * p0 * y[0] * exp(-2.0 * y[0])
        out[2] = 0.0
        out[3] = 0.0
    else:
        e = exp(-y[0])
        out[0] = 2.0 * y[1]
        out[1] = -0.5 * p1 * e * cos(y[2])
        out[2] = y[3]
        out[3] = p0 * e * sin(y[2])


def rk4(int model, double p0, double p1, y0, double t0, double dt, long nsteps,
        long stride, double floor):
    cdef double y[4]
    cdef double tmp[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef long n, done = 0, k = 1
    cdef int i, status = OK
    cdef double t = t0, h2 = 0.5 * dt
    cdef long nsave = nsteps // stride + 2
    ts_arr = np.empty(nsave)
    ys_arr = np.empty((nsave, 4))
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] ys = ys_arr
    for i in range(4):
        y[i] = float(y0[i])
        ys[0, i] = y[i]
    ts[0] = t0
    with nogil:
        for n in range(1, nsteps + 1):
            _rhs(model, p0, p1, y, k1)
            for i in range(4):
                tmp[i] = y[i] + h2 * k1[i]
            _rhs(model, p0, p1, tmp, k2)
            for i in range(4):
                tmp[i] = y[i] + h2 * k2[i]
            _rhs(model, p0, p1, tmp, k3)
            for i in range(4):
                tmp[i] = y[i] + dt * k3[i]
            _rhs(model, p0, p1, tmp, k4)
            for i in range(4):
                y[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            t = t0 + n * dt
            done = n
            if not (isfinite(y[0]) and isfinite(y[1]) and isfinite(y[2]) and isfinite(y[3])):
                status = HALT_NONFINITE
                break
            if y[0] < floor:
                status = HALT_FLOOR
                break
            if n % stride == 0:
                ts[k] = t
                for i in range(4):
                    ys[k, i] = y[i]
                k += 1
    if done % stride != 0 or status != OK:
        ts[k] = t
        for i in range(4):
            ys[k, i] = y[i]
        k += 1
    return ts_arr[:k].copy(), ys_arr[:k].copy(), status, done

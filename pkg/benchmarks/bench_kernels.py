"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times the RK4 driver of the reduced ODEs and the fused nonlinear phase
substep of the split-step propagator for both backends, and checks that the
two agree.
"""
import argparse
import time

import numpy as np

from cnls_lab import _kernels


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_rk4(mod, nsteps, repeat):
    y0 = np.array([10.0, 0.01, 0.0, 0.0])
    args = (_kernels.NONSYM, 7.0 * 1.5, 0.5, y0, 44.6, 0.01, nsteps, nsteps, -30.0)
    out = mod.rk4(*args)
    return best_of(lambda: mod.rk4(*args), repeat), out[1][-1]


def bench_phase(mod, n, reps, repeat):
    rng = np.random.default_rng(0)
    u0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    def work():
        u, v = u0.copy(), v0.copy()
        for _ in range(reps):
            mod.nonlinear_phase(u, v, 0.3, 1e-3)
        return u, v

    return best_of(work, repeat), work()


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=100_000)
    args = ap.parse_args()

    py, cy = _kernels.python, _kernels.compiled
    if cy is None:
        print("compiled extension not built; only the python backend is available")
    rows = []
    t_py, y_py = bench_rk4(py, args.steps, args.repeat)
    row = ["rk4 nonsym", f"{args.steps} steps", t_py]
    if cy is not None:
        t_cy, y_cy = bench_rk4(cy, args.steps, args.repeat)
        row += [t_cy, float(np.max(np.abs(y_py - y_cy)))]
    rows.append(row)
    for n in (2048, 16384):
        t_py, (u_py, _) = bench_phase(py, n, 200, args.repeat)
        row = ["nonlinear phase", f"N={n} x200", t_py]
        if cy is not None:
            t_cy, (u_cy, _) = bench_phase(cy, n, 200, args.repeat)
            row += [t_cy, float(np.max(np.abs(u_py - u_cy)))]
        rows.append(row)

    print(f"{'kernel':18s} {'size':14s} {'python [s]':>11s} {'cython [s]':>11s} "
          f"{'speedup':>8s} {'max diff':>9s}")
    for r in rows:
        if len(r) == 5:
            print(f"{r[0]:18s} {r[1]:14s} {r[2]:11.4f} {r[3]:11.4f} {r[2] / r[3]:8.1f} {r[4]:9.1e}")
        else:
            print(f"{r[0]:18s} {r[1]:14s} {r[2]:11.4f}")


if __name__ == "__main__":
    main()

"""Command-line runner: ``cnls-lab <experiment> [--config F] [--set k=v ...] [--out DIR]``.

Each run writes into ``DIR/<experiment>-<config hash>/`` its artifacts, a
``manifest.json`` (resolved config, overrides, status, sha256 of every
artifact) and, on failure, ``error.json``.

Exit status: 0 pass, 1 tolerance failure, 2 input error, 3 numerical fault.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from . import _kernels, interactions, linops, reduced_ode, simulate, tracking
from . import io as fio
from .config import KINDS, ConfigError, describe_keys, parse_config
from .grid import Grid, GridError
from .solitons import AnsatzError, SolitonParams, build_ansatz, q_profile

log = logging.getLogger("cnls_lab")

EXIT_PASS, EXIT_TOLERANCE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

INPUT_ERRORS = (ConfigError, GridError, AnsatzError, tracking.FitError, ValueError,
                FileNotFoundError)
NUMERICAL_ERRORS = (linops.SolverError, simulate.SimulationError, tracking.TrackingError,
                    FloatingPointError, ArithmeticError)


class Outputs:
    """Collects artifacts written into one run directory."""

    def __init__(self, root):
        self.root = root
        self.files = {}

    def path(self, name):
        return os.path.join(self.root, name)

    def json(self, name, obj):
        self.files[name] = fio.write_json(self.path(name), obj)

    def csv(self, name, header, rows):
        self.files[name] = fio.write_csv(self.path(name), header, rows)

    def text(self, name, text):
        self.files[name] = fio.atomic_write(self.path(name), text)

    def snapshot(self, name, state, omega):
        self.files[name] = fio.write_snapshot(self.path(name), state, omega)

    def checksums(self):
        return {k: fio.sha256_file(p) for k, p in sorted(self.files.items())}


def _grid(cfg):
    return Grid(cfg.L, cfg.N)


PROFILE_MIN_N = 8192


def _profile(cfg, grid, fine=False):
    if fine and grid.N < PROFILE_MIN_N:
        # the banded solve is second order in dx; solve fine, keep every m-th node
        fine = Grid(grid.L, PROFILE_MIN_N)
        prof, _ = _profile(cfg, fine)
        op = linops.Lone(grid, cfg.omega) if cfg.mode == "symmetric" else \
            linops.Lc(grid, cfg.c, cfg.omega)
        return np.ascontiguousarray(prof[::PROFILE_MIN_N // grid.N]), op
    if cfg.mode == "symmetric":
        return linops.solve_B(cfg.omega, grid), linops.Lone(grid, cfg.omega)
    return linops.solve_A(cfg.c, cfg.omega, grid), linops.Lc(grid, cfg.c, cfg.omega)


def _alpha_cap(cfg, grid, profile):
    if cfg.mode == "symmetric":
        a = interactions.alpha_symmetric(cfg.omega)
        return a, interactions.capital_omega_symmetric(cfg.omega)
    a = interactions.alpha_c(cfg.c, cfg.omega, profile, grid)
    return a, interactions.capital_omega(cfg.c, a)


def _forcing(cfg, grid):
    c = 1.0 if cfg.mode == "symmetric" else cfg.c
    return linops.profile_forcing(grid, c, cfg.omega)


def run_constants(cfg, out):
    g = _grid(cfg)
    prof, op = _profile(cfg, g)
    rhs = _forcing(cfg, g)
    alpha, cap = _alpha_cap(cfg, g, prof)
    c = 1.0 if cfg.mode == "symmetric" else cfg.c
    weight = q_profile(g.x, c) if cfg.mode == "nonsymmetric" else (1 + np.abs(g.x)) * q_profile(g.x)
    form = g.inner(linops.apply(op, prof, "spectral"), prof)
    report = {
        "c": c, "omega": cfg.omega, "mode": cfg.mode, "grid": {"L": g.L, "N": g.N},
        "kernel_backend": _kernels.BACKEND,
        "mass_Q_c": g.integrate(q_profile(g.x, c) ** 2), "mass_Q_c_exact": 4 * c,
        "alpha": alpha, "capital_omega": cap,
        "t0": math.exp(10 * c) / cap,
        "profile": "B" if cfg.mode == "symmetric" else "A",
        "solver_residual": linops.residual(op, prof, rhs, "dirichlet"),
        "solver_residual_spectral": linops.residual(op, prof, rhs, "spectral"),
        "quadratic_form": form,
        "decay_constant": linops.decay_constant(g, prof, weight),
    }
    if cfg.mode == "nonsymmetric":
        terms = interactions.alpha_c_terms(cfg.c, cfg.omega, prof, g)
        report["alpha_terms"] = terms
        report["exp_weighted_norm2"] = interactions.exp_weighted_norm2(g, c)
        report["exp_weighted_norm2_exact"] = interactions.exp_weighted_norm2_exact(c)
    checks = {"solver_residual": report["solver_residual"] <= 1e-8, "form_positive": form > 0}
    report["checks"] = checks
    report["pass"] = all(checks.values())
    out.json("constants.json", report)
    out.csv("profile.csv", ("x", "value"), zip(g.x, prof))
    return report["pass"], report


def run_operators(cfg, out):
    g = _grid(cfg)
    ids = linops.identity_residuals(g, "fd")
    ids_spec = linops.identity_residuals(g, "spectral")
    eig = {name: linops.min_eigenvalue(op) for name, op in
           (("Lplus", linops.Lplus(g)), ("Lminus", linops.Lminus(g)))}
    rel = None
    if 0 < cfg.omega < 0.5 * cfg.c * (cfg.c + 1):
        rel = linops.eigenrelation(g, cfg.c, cfg.omega)
        eig["Lc"] = rel["min_eigenvalue"]
    eig["Lone"] = linops.min_eigenvalue(linops.Lone(g, cfg.omega)) if cfg.omega < 1 else None
    checks = {k: v <= cfg.tol_identity for k, v in ids.items()}
    if rel is not None:
        checks["eigenrelation"] = rel["relative_residual"] <= cfg.tol_identity
        if rel["is_ground_state"]:
            checks["ground_state"] = abs(rel["min_eigenvalue"] - rel["eigenvalue"]) <= cfg.tol_identity
        else:
            checks["ground_state"] = rel["min_eigenvalue"] <= rel["eigenvalue"]
    report = {"grid": {"L": g.L, "N": g.N}, "identities": ids, "identities_spectral": ids_spec,
              "min_eigenvalues": eig, "eigenrelation": rel, "tolerance": cfg.tol_identity,
              "checks": checks, "pass": all(checks.values())}
    out.json("operators.json", report)
    return report["pass"], report


def run_projections(cfg, out):
    g = _grid(cfg)
    prof, _ = _profile(cfg, g)
    alpha, _ = _alpha_cap(cfg, g, prof)
    rows, reports = [], []
    c = 1.0 if cfg.mode == "symmetric" else cfg.c
    for s in cfg.sigmas:
        w = 0.5 if cfg.mode == "symmetric" else None
        p = SolitonParams.from_separation(s, 0.0, c=c, omega=cfg.omega, weight=w)
        r = interactions.interaction_report(g, p, prof, alpha, cfg.mode)
        reports.append(r.as_dict())
        rows.append((s, r.a_measured, r.a_predicted, r.ratio_a, r.b_measured,
                     r.b_predicted, r.ratio_b))
    dev = [abs(r["ratio_a"] - 1) for r in reports]
    checks = {"ratio_a": all(d <= cfg.tol_ratio for d in dev)}
    if cfg.mode == "nonsymmetric":
        checks["b_over_a"] = all(abs(r["b_measured"] / r["a_measured"] + c) <= cfg.tol_ratio * c
                                 for r in reports)
        checks["monotone"] = all(d2 < d1 for d1, d2 in zip(dev, dev[1:]))
    report = {"mode": cfg.mode, "alpha": alpha, "sigmas": list(cfg.sigmas),
              "reports": reports, "checks": checks, "pass": all(checks.values())}
    out.csv("projections.csv", ("sigma", "a_measured", "a_predicted", "ratio_a", "b_measured",
                                "b_predicted", "ratio_b"), rows)
    out.json("projections.json", report)
    return report["pass"], report


def run_reduce(cfg, out):
    m = cfg.model
    if m == "nonsym":
        g = _grid(cfg)
        alpha = interactions.alpha_c(cfg.c, cfg.omega, linops.solve_A(cfg.c, cfg.omega, g), g)
        model = reduced_ode.ModelSpec.nonsym(cfg.c, alpha)
    elif m == "sym":
        model = reduced_ode.ModelSpec.sym(interactions.alpha_symmetric(cfg.omega))
    else:
        model = reduced_ode.ModelSpec.book(cfg.c_gamma, cfg.c_sigma)
    t0 = cfg.t0 if cfg.t0 is not None else (1.0 if m == "book" else None)
    if t0 is None:
        t0 = math.exp(10 * (cfg.c if m == "nonsym" else 1.0)) / model.capital_omega
    t1 = cfg.t_end if cfg.t_end is not None else cfg.t_factor * t0
    s0 = reduced_ode.ReducedState(cfg.sigma0, cfg.beta0, cfg.gamma0, cfg.gamma_dot0)
    traj = reduced_ode.integrate(model, s0, t0, t1, cfg.ode_dt, cfg.ode_stride)
    label = reduced_ode.classify_regime(traj)
    if m == "book":
        header = ("t", "sigma", "beta", "gamma", "gamma_dot")
        rows = [(t, *st) for t, st in zip(traj.t, traj.states)]
    else:
        header = ("t", "sigma", "beta", "first_integral")
        rows = [(t, st[0], st[1], h) for t, st, h in zip(traj.t, traj.states,
                                                           traj.first_integral())]
    out.csv("reduced.csv", header, rows)
    report = {"model": m, "alpha": model.alpha, "t0": t0, "t1": t1, "dt": traj.meta["dt"],
              "steps": traj.steps, "halted": traj.halted, "reason": traj.reason,
              "regime": label.label, "diagnostics": label.diagnostics,
              "kernel_backend": _kernels.BACKEND}
    if m != "book":
        H = traj.first_integral()
        report["first_integral_start"] = float(H[0])
        report["first_integral_drift"] = float(np.max(np.abs(H - H[0])))
        report["capital_omega"] = model.capital_omega
    report["pass"] = not traj.halted
    out.json("reduce.json", report)
    return report["pass"], report


def _initial_state(cfg, g, prof, cap, beta=None):
    """Corrected ansatz at ``t0`` on the formal law, with its velocity.

    Symmetric runs take the separation from the formal law and the velocity
    from ``cfg.sym_start`` (or ``beta`` when given).
    """
    if cfg.mode == "symmetric":
        t0 = cfg.t0 if cfg.t0 is not None else math.exp(10.0) / cap
        alpha = cap ** 2 / 4
        sigma, beta_formal = reduced_ode.sym_formal(reduced_ode.ModelSpec.sym(alpha), t0)
        sigma = float(sigma)
        if beta is None:
            if cfg.sym_start == "formal":
                beta = float(beta_formal)
            else:
                _, kappa = interactions.symmetric_force_law(_profile_grid(g), _fine_B(cfg, g),
                                                             cfg.omega)
                beta = reduced_ode.sym_separatrix_beta(alpha, sigma, kappa)
        p = SolitonParams.from_separation(sigma, beta, c=1.0, omega=cfg.omega, weight=0.5)
        predict = lambda t: math.log(t) + 0.5 * math.log(math.log(t)) + math.log(cap)
    else:
        c = cfg.c
        t0 = cfg.t0 if cfg.t0 is not None else math.exp(10 * c) / cap
        sigma, beta = math.log(cap * t0) / c, 1.0 / (2 * c * t0)
        p = SolitonParams.from_separation(sigma, beta, c=c, omega=cfg.omega)
        predict = lambda t: math.log(cap * t) / c
    U, V = build_ansatz(g, p, t=t0, profile=prof, mode=cfg.mode)
    return simulate.SimState(g, t0, U, V), p, predict


def _profile_grid(g):
    return g if g.N >= PROFILE_MIN_N else Grid(g.L, PROFILE_MIN_N)


def _fine_B(cfg, g):
    return linops.solve_B(cfg.omega, _profile_grid(g))


def _sim_config(cfg, g, t_end):
    c = 1.0 if cfg.mode == "symmetric" else cfg.c
    return simulate.SimConfig(g, cfg.dt, t_end, cfg.omega, snapshot_stride=cfg.snapshot_stride,
                              sample_every=cfg.sample_every,
                              enforce_symmetry=cfg.enforce_symmetry, dealias=cfg.dealias, c=c)


def _shoot(cfg, out, g, prof, cap, state, p):
    """Calibration run from ``state``; returns the separatrix-corrected velocity."""
    sc = _sim_config(cfg, g, cfg.calib_factor * state.t)
    sc.snapshot_stride = 0
    res = simulate.run(sc, state)
    out.text("calibration.csv", tracking.record_csv_text(res.record))
    if res.halted:
        raise tracking.TrackingError(f"calibration run halted: {res.halt_reason}")
    _, kappa = interactions.symmetric_force_law(_profile_grid(g), _fine_B(cfg, g), cfg.omega)
    return reduced_ode.fit_sym_effective(res.record.times, res.record.y, cap ** 2 / 4, p.beta,
                                         kappa0=kappa)


def _simulate(cfg, out):
    g = _grid(cfg)
    prof, _ = _profile(cfg, g, fine=True)
    _, cap = _alpha_cap(cfg, g, prof)
    state, p, predict = _initial_state(cfg, g, prof, cap)
    shooting = None
    if cfg.mode == "symmetric" and cfg.sym_start == "shooting":
        shooting = _shoot(cfg, out, g, prof, cap, state, p)
        log.info("shooting: %s", shooting.as_dict())
        state, p, predict = _initial_state(cfg, g, prof, cap, beta=shooting.beta_separatrix)
    t_end = cfg.t_end if cfg.t_end is not None else cfg.t_factor * state.t
    res = simulate.run(_sim_config(cfg, g, t_end), state, predict=predict)
    out.text("trajectory.csv", tracking.record_csv_text(res.record))
    for i, snap in enumerate(res.snapshots):
        out.snapshot(f"snapshot_{i:05d}.bin", snap, cfg.omega)
    out.snapshot("final.bin", res.final, cfg.omega)
    summary = {"t0": state.t, "t_end": t_end, "capital_omega": cap, "samples": len(res.record),
               "initial": {"sigma": p.sigma, "beta": p.beta, "sigma1": p.sigma1,
                           "sigma2": p.sigma2},
               "halted": res.halted, "halt_reason": res.halt_reason,
               "symmetry_defect": res.symmetry_defect, "kernel_backend": _kernels.BACKEND}
    if shooting is not None:
        summary["shooting"] = shooting.as_dict()
    return res, summary, cap


def run_simulate(cfg, out):
    res, summary, _ = _simulate(cfg, out)
    rec = res.record
    summary["drifts"] = {k: rec.drift(k) for k in ("mass_u", "mass_v", "energy")}
    checks = {"completed": not res.halted,
              "mass": max(summary["drifts"]["mass_u"], summary["drifts"]["mass_v"]) <= cfg.tol_mass,
              "energy": summary["drifts"]["energy"] <= cfg.tol_energy}
    if cfg.enforce_symmetry:
        checks["symmetry"] = res.symmetry_defect <= 1e-10
    summary["checks"] = checks
    summary["pass"] = all(checks.values())
    out.json("simulate.json", summary)
    return summary["pass"], summary


def _tolerances(cfg):
    return {"slope_rel": cfg.tol_slope_rel, "intercept_decay_lengths": cfg.tol_intercept,
            "loglog_min": cfg.loglog_min, "loglog_max": cfg.loglog_max,
            "mass_drift": cfg.tol_mass, "energy_drift": cfg.tol_energy}


def run_regime(cfg, out):
    res, summary, cap = _simulate(cfg, out)
    if res.halted:
        summary["pass"] = False
        out.json("simulate.json", summary)
        raise tracking.TrackingError(f"run halted: {res.halt_reason}")
    expected = "sym" if cfg.mode == "symmetric" else "nonsym"
    window = (cfg.fit_t_min if cfg.fit_t_min is not None else -np.inf,
              cfg.fit_t_max if cfg.fit_t_max is not None else np.inf)
    rep = tracking.regime_report(res.record, expected, c=cfg.c, capital_omega=cap,
                                 window=window, tolerances=_tolerances(cfg),
                                 check_intercept=expected == "nonsym")
    d = rep.as_dict()
    if cfg.enforce_symmetry:
        d["checks"]["symmetry"] = res.symmetry_defect <= 1e-10
        d["pass"] = all(d["checks"].values())
    d["simulation"] = summary
    out.json("fit_report.json", d)
    return d["pass"], d


def run_fit(cfg, out):
    rec = tracking.TrajectoryRecord.from_csv(cfg.trajectory)
    t, y = np.asarray(rec.times), rec.y
    lo = cfg.fit_t_min if cfg.fit_t_min is not None else -np.inf
    hi = cfg.fit_t_max if cfg.fit_t_max is not None else np.inf
    mask = (t >= lo) & (t <= hi)
    fit = tracking.fit_log(t[mask], y[mask], cfg.fit_model, cfg.fixed_slope)
    d = {"model": fit.model, "coefficients": fit.coefficients, "residual_rms": fit.residual_rms,
         "window": list(fit.window), "condition": fit.condition, "samples": fit.n,
         "tolerances": _tolerances(cfg)}
    c = 1.0 if cfg.fit_model == "log_plus_loglog" else cfg.c
    if cfg.fit_model == "pure_log":
        ok = abs(fit.coefficients["p"] - 1 / c) <= cfg.tol_slope_rel / c
    else:
        ok = cfg.loglog_min <= fit.coefficients["r"] <= cfg.loglog_max
    d["pass"] = bool(ok)
    out.json("fit_report.json", d)
    return d["pass"], d


EXPERIMENTS = {
    "constants": run_constants, "operators": run_operators, "projections": run_projections,
    "reduce": run_reduce, "simulate": run_simulate, "regime": run_regime, "fit": run_fit,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="cnls-lab", description=__doc__.split("\n\n")[0],
        epilog="configuration keys:\n" + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("experiment", choices=KINDS)
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   help="override a configuration key (repeatable)")
    p.add_argument("--out", metavar="DIR", default="runs", help="output root (default: runs)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run_experiment(cfg, out_root) -> tuple[int, str]:
    """Run one validated config; return ``(exit status, run directory)``."""
    kind = cfg.kind
    run_dir = os.path.join(out_root, f"{kind}-{cfg.digest()[:12]}")
    out = Outputs(run_dir)
    status, error, result = EXIT_PASS, None, None
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            ok, result = EXPERIMENTS[kind](cfg, out)
        status = EXIT_PASS if ok else EXIT_TOLERANCE
    except NUMERICAL_ERRORS as exc:
        status, error = EXIT_NUMERICAL, exc
    except INPUT_ERRORS as exc:
        status, error = EXIT_INPUT, exc
    if error is not None:
        diag = {"error": type(error).__name__, "message": str(error)}
        if getattr(error, "residual", None) is not None:
            diag["residual"] = error.residual
        out.json("error.json", diag)
    manifest = {
        "experiment": kind, "config": cfg.resolved(), "overrides": cfg.overrides,
        "config_sha256": cfg.digest(), "status": status,
        "status_name": {0: "pass", 1: "tolerance_failure", 2: "input_error",
                        3: "numerical_fault"}[status],
        "artifacts": out.checksums(), "version": __version__,
    }
    fio.write_json(os.path.join(run_dir, "manifest.json"), manifest)
    return status, run_dir


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    text, source = "", "config"
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return EXIT_INPUT
        source = args.config
    try:
        cfg = parse_config(text, args.set, kind=args.experiment, source=source)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    status, run_dir = run_experiment(cfg, args.out)
    print(f"{args.experiment}: {['pass', 'tolerance failure', 'input error', 'numerical fault'][status]}"
          f" -> {run_dir}")
    return status


if __name__ == "__main__":
    sys.exit(main())

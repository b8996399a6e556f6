"""Flat ``key = value`` run configuration with full validation.

Blank lines and ``#`` comments are ignored. Every problem found is reported
(with its line number), not just the first one.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

KINDS = ("constants", "operators", "projections", "reduce", "simulate", "regime", "fit")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _bool(s):
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _floats(s):
    out = [float(p) for p in s.replace(",", " ").split()]
    if not out:
        raise ValueError("empty list")
    return out


def _choice(*opts):
    def conv(s):
        if s not in opts:
            raise ValueError(f"{s!r} not one of {', '.join(opts)}")
        return s
    conv.__name__ = "one of " + "|".join(opts)
    return conv


def _str(s):
    return s


# key: (converter, default, help)
KEYS = {
    "kind": (_choice(*KINDS), None, "experiment; normally given by the subcommand"),
    "c": (_float, None, "speed/scale of the u soliton, 0 < c <= 1 (required)"),
    "omega": (_float, None, "coupling constant (required)"),
    "mode": (_choice("nonsymmetric", "symmetric"), "nonsymmetric", "ansatz/regime family"),
    "L": (_float, None, "half box length; grid is [-L, L)"),
    "N": (_int, None, "grid points, a power of two"),
    "dt": (_float, None, "PDE time step (default 0.005, symmetric runs 0.007)"),
    "t0": (_float, None, "start time; default inverts the formal law at separation 10c"),
    "t_factor": (_float, None, "run to t_factor * t0 unless t_end is given "
                 "(default 8, symmetric runs 32)"),
    "sym_start": (_choice("formal", "separatrix", "shooting"), "shooting",
                  "symmetric initial velocity: formal law, zero-energy velocity of the "
                  "projected force, or that corrected by a calibration run"),
    "calib_factor": (_float, 3.0, "shooting calibration run length, in units of t0"),
    "t_end": (_float, None, "end time"),
    "sample_every": (_float, None, "tracking/sample interval, a multiple of dt "
                     "(default: nearest multiple to 1, symmetric runs 5)"),
    "snapshot_stride": (_int, 0, "keep every n-th sample as a binary snapshot (0 = none)"),
    "enforce_symmetry": (_bool, None, "project onto u(x) = v(-x) each step"),
    "dealias": (_bool, False, "2/3-rule filter in the linear substep (diagnostic)"),
    "sigmas": (_floats, [10.0, 12.0, 14.0], "separations for projections"),
    "model": (_choice("nonsym", "sym", "book"), None, "reduced ODE model"),
    "sigma0": (_float, None, "initial separation for reduce"),
    "beta0": (_float, None, "initial relative velocity parameter for reduce"),
    "gamma0": (_float, 0.0, "initial phase difference (book)"),
    "gamma_dot0": (_float, 0.0, "initial phase velocity (book)"),
    "c_gamma": (_float, 1.0, "book model constant"),
    "c_sigma": (_float, 1.0, "book model constant"),
    "ode_dt": (_float, 0.01, "RK4 step for reduce"),
    "ode_stride": (_int, 100, "keep every n-th RK4 step"),
    "trajectory": (_str, None, "trajectory CSV to fit"),
    "fit_model": (_choice("pure_log", "log_plus_loglog"), None, "fit family"),
    "fixed_slope": (_float, None, "pin the log t coefficient"),
    "fit_t_min": (_float, None, "fit window start"),
    "fit_t_max": (_float, None, "fit window end"),
    "tol_identity": (_float, 1e-6, "operator identity residual bound"),
    "tol_ratio": (_float, 0.1, "|a e^{2c sigma}/alpha_c - 1| bound"),
    "tol_slope_rel": (_float, 0.15, "relative slope tolerance"),
    "tol_intercept": (_float, 0.2, "intercept tolerance in decay lengths 1/c"),
    "loglog_min": (_float, 0.25, "lower bound on the log log coefficient"),
    "loglog_max": (_float, 0.75, "upper bound on the log log coefficient"),
    "tol_mass": (_float, None, "relative mass drift bound (default 1e-10, symmetric runs 1e-8: "
                 "rounding accumulates ~1e-16 per step over ~1e7 steps)"),
    "tol_energy": (_float, 1e-6, "relative energy drift bound"),
}

# grid defaults per experiment when L, N are not given
GRID_DEFAULTS = {
    "constants": (80.0, 8192),
    "operators": (25.0, 4096),
    "projections": (80.0, 8192),
    "simulate": (80.0, 16384),
    "regime": (80.0, 16384),
}
# Long symmetric runs need (1 + kmax^2) dt < pi, kmax = pi N / (2 L), to stay
# clear of the splitting resonance; (40, 512) with dt = 0.007 satisfies it.
SYMMETRIC_GRID = (40.0, 512)
SYMMETRIC_DT = 0.007


@dataclass
class RunConfig:
    values: dict
    overrides: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    def resolved(self) -> dict:
        return dict(self.values)

    def digest(self) -> str:
        blob = json.dumps(self.values, sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_lines(text: str, source: str = "config"):
    """``{key: (raw, where)}`` plus syntax errors."""
    raw, errors = {}, []
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{n}"
        if "=" not in body:
            errors.append(f"{where}: expected 'key = value', got {body!r}")
            continue
        key, val = (p.strip() for p in body.split("=", 1))
        if key not in KEYS:
            errors.append(f"{where}: unknown key {key!r}")
            continue
        if key in raw:
            errors.append(f"{where}: duplicate key {key!r} (first at {raw[key][1]})")
            continue
        raw[key] = (val, where)
    return raw, errors


def parse_config(text: str, overrides=(), kind: str | None = None,
                 source: str = "config") -> RunConfig:
    """Parse, apply ``key=value`` overrides (they win) and validate.

    Raises :class:`ConfigError` listing every violation.
    """
    raw, errors = parse_lines(text, source)
    ov = {}
    for i, item in enumerate(overrides, 1):
        sub, err = parse_lines(item, f"--set #{i}")
        errors.extend(err)
        for k, v in sub.items():
            raw[k] = v
            ov[k] = v[0]
    if kind is not None:
        if "kind" in raw and raw["kind"][0] != kind:
            ov["kind"] = kind
        raw["kind"] = (kind, "command line")

    values = {}
    for key, (conv, default, _) in KEYS.items():
        if key in raw:
            text_val, where = raw[key]
            try:
                values[key] = conv(text_val)
            except ValueError as exc:
                errors.append(f"{where}: {key}: type mismatch, {exc}")
                values[key] = default
        else:
            values[key] = default
    where = {k: w for k, (_, w) in raw.items()}
    errors.extend(_validate(values, where))
    if errors:
        raise ConfigError(errors)
    _resolve(values)
    errors.extend(_validate_resolved(values, where))
    if errors:
        raise ConfigError(errors)
    return RunConfig(values, ov)


def _at(where, key):
    return where.get(key, "config")


def _validate(v, where):
    errs = []
    kind = v["kind"]
    if kind is None:
        errs.append("config: missing required key 'kind' (or use a subcommand)")
    need = ["c", "omega"]
    if kind == "fit":
        need.append("trajectory")
    if kind == "reduce":
        need += ["model", "sigma0", "beta0"]
    for k in need:
        if v[k] is None and k not in where:
            errs.append(f"config: missing required key {k!r}")
    c, w = v["c"], v["omega"]
    symmetric = v["mode"] == "symmetric" or v["model"] == "sym"
    if c is not None and not (0 < c <= 1):
        errs.append(f"{_at(where, 'c')}: c = {c:g} out of range, need 0 < c <= 1")
    elif c is not None and w is not None:
        if symmetric:
            if c != 1:
                errs.append(f"{_at(where, 'c')}: symmetric experiments need c = 1, got {c:g}")
            if not 0 < w < 1:
                errs.append(f"{_at(where, 'omega')}: omega = {w:g} out of range, need 0 < omega < 1")
        elif v["model"] != "book":
            bound = 0.5 * c * (c + 1)
            if not 0 < w < bound:
                errs.append(f"{_at(where, 'omega')}: omega = {w:g} out of range, need "
                            f"0 < omega < c(c+1)/2 = {bound:g} at c = {c:g}")
    for k in ("dt", "sample_every", "ode_dt", "t_factor", "c_gamma", "c_sigma", "L",
              "calib_factor"):
        if v[k] is not None and not v[k] > 0:
            errs.append(f"{_at(where, k)}: {k} must be positive")
    n = v["N"]
    if n is not None and (n < 4 or n & (n - 1)):
        errs.append(f"{_at(where, 'N')}: N = {n} must be a power of two >= 4")
    for k in ("snapshot_stride",):
        if v[k] < 0:
            errs.append(f"{_at(where, k)}: {k} must be >= 0")
    if v["ode_stride"] < 1:
        errs.append(f"{_at(where, 'ode_stride')}: ode_stride must be >= 1")
    if v["sigma0"] is not None and v["model"] in ("nonsym", "sym") and v["sigma0"] <= 0:
        errs.append(f"{_at(where, 'sigma0')}: sigma0 must be positive")
    if v["t0"] is not None and not v["t0"] > 0:
        errs.append(f"{_at(where, 't0')}: t0 must be positive")
    if v["loglog_min"] > v["loglog_max"]:
        errs.append(f"{_at(where, 'loglog_min')}: loglog_min exceeds loglog_max")
    for k in v:
        if isinstance(v[k], float) and not math.isfinite(v[k]):
            errs.append(f"{_at(where, k)}: {k} must be finite")
    return errs


def _validate_resolved(v, where):
    errs = []
    r = v["sample_every"] / v["dt"]
    if abs(r - round(r)) > 1e-9 * r:
        errs.append(f"{_at(where, 'sample_every')}: sample_every = {v['sample_every']:g} "
                    f"must be a multiple of dt = {v['dt']:g}")
    return errs


def _resolve(v):
    symmetric = v["mode"] == "symmetric"
    L, N = SYMMETRIC_GRID if symmetric and v["kind"] in ("simulate", "regime") \
        else GRID_DEFAULTS.get(v["kind"], (80.0, 8192))
    if v["L"] is None:
        v["L"] = L
    if v["N"] is None:
        v["N"] = N
    if v["enforce_symmetry"] is None:
        v["enforce_symmetry"] = symmetric
    if v["dt"] is None:
        v["dt"] = SYMMETRIC_DT if symmetric and v["kind"] in ("simulate", "regime") else 0.005
    if v["tol_mass"] is None:
        v["tol_mass"] = 1e-8 if symmetric and v["kind"] in ("simulate", "regime") else 1e-10
    if v["t_factor"] is None:
        v["t_factor"] = 32.0 if symmetric else 8.0
    if v["sample_every"] is None:
        target = 20.0 if symmetric else 1.0
        v["sample_every"] = max(1, round(target / v["dt"])) * v["dt"]
    if v["fit_model"] is None:
        v["fit_model"] = "log_plus_loglog" if symmetric else "pure_log"


def describe_keys() -> str:
    rows = []
    for k, (conv, default, doc) in KEYS.items():
        rows.append(f"{k:18s} {doc} (default: {default})")
    return "\n".join(rows)

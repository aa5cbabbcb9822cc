"""Command-line entry point: simulate | dispersion | analytic | design | validate.

Parameters come from flags and/or a JSON file given with ``--config``; flags
win.  A JSON result written by this tool can itself be passed as ``--config``
(its ``config`` block is read back).  Tables are CSV with 17 significant
digits; JSON documents carry a ``schema_version``.

Exit codes: 0 success, 1 failed validation suite, 2 invalid input,
3 numerical failure, 4 infeasible design.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .analytics import AnalyticContext, ContinuumWarning, chi_max, continuum_I, find_offset_h
from .core import InfeasibleError, LatticeSpec, NumericalError, ValidationError, build_lattice
from .coupling import CouplingModel, SingleAtomTerm, coupling_matrix, dicke_matrix
from .design import DesignTarget, solve_design
from .spectrum import dispersion_scan, solve_modes
from .validation import SUITES, run_suite

SCHEMA_VERSION = 1
WORKERS_ENV = "SUPERRAD_MAX_WORKERS"

EXIT_OK, EXIT_FAILED, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 1, 2, 3, 4

DEFAULTS = {
    "d": 1, "m": None, "N": None, "alpha": 0.0, "A": 1.0, "k0a": 3.0, "epsilon": 1,
    "delta_omega0": 0.0, "dicke": False, "n": None, "theta": math.pi / 2, "phi": None,
    "k_min": None, "k_max": None, "xi_max": 3 * math.pi, "points": 241, "k": None,
    "gamma": None, "delta": 0.0, "free": "N", "suite": "all", "seed": 0,
    "output": None, "format": None,
}


class UsageError(ValidationError):
    def __init__(self, message):
        super().__init__("usage", message)


# --- configuration -------------------------------------------------------------


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def resolve(args: argparse.Namespace) -> dict:
    """Defaults < config file < flags."""
    cfg = dict(DEFAULTS)
    flags = vars(args).copy()
    flags.pop("command", None)
    path = flags.pop("config", None)
    if path:
        cfg.update(load_config(path))
    cfg.update(flags)
    return cfg


def _model(cfg) -> CouplingModel:
    d = int(cfg["d"])
    eps = int(cfg["epsilon"])
    A = float(cfg["A"])
    if A < 0:
        raise ValidationError("bad_amplitude", "--A is the magnitude |A_d| and must be >= 0")
    return CouplingModel(A_d=-1j * eps * A if d == 3 else A, alpha=float(cfg["alpha"]),
                         epsilon=eps, d=d)


def _lattice_spec(cfg) -> LatticeSpec:
    d, k0a = int(cfg["d"]), float(cfg["k0a"])
    if cfg.get("m") is not None:
        return LatticeSpec(d, k0a, cfg["m"])
    if cfg.get("N") is not None:
        return LatticeSpec.from_atom_count(d, k0a, cfg["N"])
    raise UsageError("give the lattice size with --m or --N")


# --- output ----------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj)}")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(command, cfg, result) -> str:
    public = {k: v for k, v in cfg.items() if k not in ("output", "format")}
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
           "config": public, "result": result}
    return json.dumps(doc, indent=2, default=_plain) + "\n"


def write_atomic(path, text: str):
    """Write via a temporary file in the target directory and rename."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(command, cfg, table, result, default_format):
    fmt = cfg.get("format") or default_format
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")
    if fmt == "csv":
        if table is None:
            raise UsageError(f"{command} has no tabular output; use --format json")
        text = render_csv(*table)
    else:
        if result is None:
            header, rows = table
            result = [dict(zip(header, r)) for r in rows]
        text = render_json(command, cfg, result)
    write_atomic(cfg.get("output"), text)


# --- commands ----------------------------------------------------------------------


def cmd_simulate(cfg) -> int:
    term = SingleAtomTerm(float(cfg["delta_omega0"]))
    if cfg["dicke"]:
        if cfg.get("n") is None:
            raise UsageError("--dicke needs --n")
        M = dicke_matrix(cfg["n"], term)
    else:
        lattice = build_lattice(_lattice_spec(cfg))
        M = coupling_matrix(lattice, _model(cfg), term)
    res = solve_modes(M)
    header = ["mode", "gamma", "delta", "re_E", "im_E"]
    rows = [(i, g, s, e.real, e.imag)
            for i, (g, s, e) in enumerate(zip(res.rates, res.shifts, res.eigenvalues))]
    result = {"residual": res.residual, "modes": [dict(zip(header, r)) for r in rows]}
    _emit("simulate", cfg, (header, rows), result, "csv")
    return EXIT_OK


DISPERSION_COLUMNS = ["k", "xi", "chi_hat", "shift_hat", "chi", "shift", "Re(I)", "Im(I)"]


def _k_range(cfg, ctx):
    if cfg.get("k_min") is not None and cfg.get("k_max") is not None:
        return float(cfg["k_min"]), float(cfg["k_max"])
    xm = float(cfg["xi_max"])
    return float(ctx.k_of_xi(-xm)), float(ctx.k_of_xi(xm))


def cmd_dispersion(cfg) -> int:
    spec = _lattice_spec(cfg)
    model = _model(cfg)
    ctx = AnalyticContext.from_models(spec, model, cfg["theta"] if spec.d == 3 else None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumWarning)
        scale = chi_max(ctx) - 1.0
    k_min, k_max = _k_range(cfg, ctx)
    pts = dispersion_scan(build_lattice(spec), model, k_min, k_max, cfg["points"],
                          theta=float(cfg["theta"]), phi=cfg.get("phi"))
    rows = [(p.k, float(ctx.xi(p.k)), p.I.real / scale, p.shift / scale, p.chi, p.shift,
             p.I.real, p.I.imag) for p in pts]
    _emit("dispersion", cfg, (DISPERSION_COLUMNS, rows), None, "csv")
    return EXIT_OK


def cmd_analytic(cfg) -> int:
    d = int(cfg["d"])
    model = _model(cfg)
    if cfg.get("m") is not None:
        N = int(cfg["m"]) ** d
    elif cfg.get("N") is not None:
        N = int(cfg["N"])
    else:
        raise UsageError("give the atom count with --N or --m")
    ctx = AnalyticContext(d, model.alpha, model.epsilon, complex(model.A_d), float(cfg["k0a"]),
                          N, cfg["theta"] if d == 3 else None)
    cmax = chi_max(ctx)
    if cfg.get("k") is not None:
        ks = [float(cfg["k"])]
    else:
        k_min, k_max = _k_range(cfg, ctx)
        ks = np.linspace(k_min, k_max, int(cfg["points"])).tolist()
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumWarning)
        for k in ks:
            r = continuum_I(ctx, k)
            rows.append((k, r.xi, r.I.real / (cmax - 1), r.shift / (cmax - 1), r.chi, r.shift,
                         r.I.real, r.I.imag))
    result = {"chi_max": cmax, "h": find_offset_h(), "validity_window": ctx.validity_window,
              "points": [dict(zip(DISPERSION_COLUMNS, r)) for r in rows]}
    _emit("analytic", cfg, (DISPERSION_COLUMNS, rows), result, "csv")
    return EXIT_OK


def cmd_design(cfg) -> int:
    if cfg.get("gamma") is None:
        raise UsageError("design needs --gamma")
    target = DesignTarget(
        gamma_target=float(cfg["gamma"]), delta_target=float(cfg["delta"]), d=int(cfg["d"]),
        alpha=float(cfg["alpha"]), epsilon=int(cfg["epsilon"]), A=float(cfg["A"]),
        k0a=float(cfg["k0a"]), N=cfg.get("N"), free=cfg["free"], theta=float(cfg["theta"]),
    )
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always", ContinuumWarning)
        sol = solve_design(target)
    for note in sol.warnings:
        print(f"warning: {note}", file=sys.stderr)
    result = sol.to_dict()
    header = list(result)
    row = [result[h] if h != "warnings" else "; ".join(result[h]) for h in header]
    _emit("design", cfg, (header, [row]), result, "json")
    return EXIT_OK


def _max_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"{WORKERS_ENV} must be an integer") from exc
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1")
    return n


def cmd_validate(cfg) -> int:
    name = cfg["suite"]
    if name not in SUITES + ("all",):
        raise UsageError(f"unknown suite {name!r}")
    seed = int(cfg["seed"])
    names = SUITES if name == "all" else (name,)
    workers = min(_max_workers(), len(names))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_suite, names, [seed] * len(names)))
    else:
        reports = [run_suite(n, seed) for n in names]
    passed = all(bool(r["passed"]) for r in reports)
    result = {"suite": name, "seed": seed, "passed": passed, "reports": reports}
    _emit("validate", cfg, None, result, "json")
    for r in reports:
        print(f"{r['suite']}: {'PASS' if r['passed'] else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILED


COMMANDS = {"simulate": cmd_simulate, "dispersion": cmd_dispersion, "analytic": cmd_analytic,
            "design": cmd_design, "validate": cmd_validate}


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file with parameters (flags override)")
    common.add_argument("--output", "-o", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    system = argparse.ArgumentParser(add_help=False, argument_default=S)
    system.add_argument("--d", type=int, help="lattice dimension 1, 2 or 3")
    system.add_argument("--m", type=int, help="atoms per side (even)")
    system.add_argument("--N", type=int, help="total atom count m^d")
    system.add_argument("--alpha", type=float, help="coupling decay exponent")
    system.add_argument("--A", type=float, help="coupling amplitude |A_d|")
    system.add_argument("--k0a", type=float, help="lattice constant times k0")
    system.add_argument("--epsilon", type=int, choices=(1, -1), help="phase sign")
    system.add_argument("--theta", type=float, help="polar angle of k (d=3)")

    p = argparse.ArgumentParser(prog="superrad", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common, system], argument_default=S,
                        help="diagonalise the coupling matrix")
    sp.add_argument("--delta-omega0", dest="delta_omega0", type=float)
    sp.add_argument("--dicke", action="store_true", help="all-to-all small-volume limit")
    sp.add_argument("--n", type=int, help="atom count for --dicke")

    scan = argparse.ArgumentParser(add_help=False, argument_default=S)
    scan.add_argument("--k-min", dest="k_min", type=float)
    scan.add_argument("--k-max", dest="k_max", type=float)
    scan.add_argument("--xi-max", dest="xi_max", type=float,
                      help="half-width of the symmetric scan in xi (when k range is unset)")
    scan.add_argument("--points", type=int)

    sp = sub.add_parser("dispersion", parents=[common, system, scan], argument_default=S,
                        help="lattice sums I_d(k) along a wavenumber scan")
    sp.add_argument("--phi", type=float, help="in-plane azimuth of k")

    sp = sub.add_parser("analytic", parents=[common, system, scan], argument_default=S,
                        help="continuum closed forms")
    sp.add_argument("--k", type=float, help="single wavenumber instead of a scan")

    sp = sub.add_parser("design", parents=[common, system], argument_default=S,
                        help="parameters for a target decay rate and shift")
    sp.add_argument("--gamma", type=float, help="target decay rate (units of gamma0)")
    sp.add_argument("--delta", type=float, help="target shift (units of gamma0)")
    sp.add_argument("--free", choices=("N", "k0a", "A", "alpha"))

    sp = sub.add_parser("validate", parents=[common], argument_default=S,
                        help="run the cross-check suites")
    sp.add_argument("--suite", choices=SUITES + ("all",))
    sp.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``hjb-growth <subcommand> [options]``.

Every run writes its outputs atomically into ``--out`` together with a
``manifest.json``. Exit codes: 0 success, 1 model or certificate failure,
2 usage or configuration error.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .diagnostics import FormMismatch, counterexample_suite, diagnose, magic_of_capital_demo
from .hjb import DegenerateGrid, NonConvergence, ValueGrid, hjb_residual, solve_hjb
from .model import FAIL, check_assumptions
from .ode import (IntegratorConfig, Path, RangeExit, StepFailure, discounted_utility,
                  euler_shooting, optimal_path, payoff, steady_state)
from .policy import BracketFailure, maximize_hamiltonian

logger = logging.getLogger("hjbgrowth")

EXIT_OK, EXIT_MODEL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(x):
    return f"{float(x):.15g}"


def _csv_text(header, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(type(obj).__name__)


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default,
                      allow_nan=True) + "\n"


class _Writer:
    """Collects outputs and commits each through a temp file and ``os.replace``."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files = []

    def write(self, name, text):
        os.makedirs(self.out_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, os.path.join(self.out_dir, name))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.files.append(name)

    def manifest(self, subcommand, config_hash, started):
        body = {
            "config_hash": config_hash,
            "tool_version": __version__,
            "subcommand": subcommand,
            "outputs": sorted(self.files + ["manifest.json"]),
            "wall_time_ms": int(round((time.perf_counter() - started) * 1000)),
        }
        self.write("manifest.json", _json_text(body))


def _argv_hash(args):
    items = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "verbose", "func")}
    return hashlib.sha256(json.dumps(items, sort_keys=True, default=str).encode()).hexdigest()


def _load(args, required=True):
    if args.config is None:
        if required:
            raise UsageError("--config is required for this subcommand")
        return None
    if not os.path.isfile(args.config):
        raise UsageError(f"--config: no such file {args.config!r}")
    try:
        return load_config(args.config)
    except ConfigError as exc:
        raise UsageError(f"--config: {exc}") from exc


def _value_csv(V, model):
    k = V.nodes
    c = [maximize_hamiltonian(model, float(kk), float(p)).c_star if p > 0 else float("nan")
         for kk, p in zip(k, V.node_derivs)]
    res = [hjb_residual(model, V, float(kk)) for kk in k]
    return _csv_text(["k", "V", "dV", "c_policy", "residual"], [k, V.values, V.node_derivs, c, res])


def read_value_csv(path):
    """Rebuild a :class:`ValueGrid` from a ``value.csv`` written by ``solve``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"k", "V", "dV"} <= set(rows[0]):
        raise UsageError(f"{path} is not a value.csv (needs columns k, V, dV)")
    k = np.array([float(r["k"]) for r in rows])
    return ValueGrid(k, np.array([float(r["V"]) for r in rows]),
                     np.array([float(r["dV"]) for r in rows]))


def read_path_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"t", "k", "c"} <= set(rows[0]):
        raise UsageError(f"--path: {path} is not a path.csv (needs columns t, k, c)")
    col = {name: np.array([float(r[name]) for r in rows]) for name in ("t", "k", "c")}
    return Path(col["t"], col["k"], col["c"], {"source": os.path.basename(path)})


def _path_outputs(writer, model, path, extra, summary_name):
    dens = discounted_utility(model, path)
    writer.write("path.csv", _csv_text(["t", "k", "c", "discounted_utility_density"],
                                       [path.times, path.capital, path.consumption, dens]))
    summary = {"termination": path.termination, **extra}
    try:
        pr = payoff(model, path, "trapezoid")
        summary.update(payoff=pr.value, tail_bound=pr.tail_bound, horizon=pr.horizon)
    except ArithmeticError as exc:
        summary.update(payoff=None, payoff_error=str(exc))
    writer.write(summary_name, _json_text(summary))
    return summary


def _obtain_value(args, cfg):
    if getattr(args, "value_dir", None):
        fname = os.path.join(args.value_dir, "value.csv")
        if not os.path.isfile(fname):
            raise UsageError(f"--value-dir: no value.csv in {args.value_dir!r}")
        return read_value_csv(fname)
    V, _ = solve_hjb(cfg.model, cfg.grid, cfg.solve, a6=cfg.a6, horizon=cfg.horizon)
    return V


def _integrator(args):
    t_end = getattr(args, "t_end", None)
    return IntegratorConfig(t_end=100.0 if t_end is None else t_end)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(args, writer):
    cfg = _load(args)
    report = check_assumptions(cfg.model, a6=cfg.a6)
    writer.write("assumptions.json", _json_text(report.to_dict()))
    for v in report.verdicts:
        print(f"A{v.assumption}: {v.status}")
        if v.status == FAIL and v.witness:
            print(f"    witness: {v.witness}")
    return cfg.config_hash, (EXIT_MODEL if report.failing() else EXIT_OK)


def cmd_solve(args, writer):
    cfg = _load(args)
    V, cert = solve_hjb(cfg.model, cfg.grid, cfg.solve, a6=cfg.a6, horizon=cfg.horizon)
    writer.write("value.csv", _value_csv(V, cfg.model))
    writer.write("certificate.json", _json_text(cert.to_dict()))
    print(f"iterations={cert.iterations} max_abs_residual={cert.max_abs_residual:.3e} "
          f"increasing={cert.increasing} concave={cert.concave} "
          f"growth={cert.growth_condition} in_class_V={cert.in_class_V}")
    return cfg.config_hash, (EXIT_OK if cert.in_class_V else EXIT_MODEL)


def cmd_policy(args, writer):
    cfg = _load(args)
    if args.k is None or args.p is None:
        raise UsageError("policy needs --k and --p")
    if not (args.k > 0 and args.p > 0):
        raise UsageError("--k and --p must be > 0")
    try:
        r = maximize_hamiltonian(cfg.model, args.k, args.p)
        out = {"k": args.k, "p": args.p, "c_star": r.c_star, "h_value": r.h_value,
               "foc_residual": r.foc_residual, "iterations": r.iterations,
               "interior": r.interior, "near_corner": r.near_corner}
        code = EXIT_OK
    except BracketFailure as exc:
        out = {"k": args.k, "p": args.p, "error": str(exc), "h_value": float("inf")}
        code = EXIT_MODEL
    text = _json_text(out)
    writer.write("policy.json", text)
    print(text, end="")
    return cfg.config_hash, code


def cmd_path(args, writer):
    cfg = _load(args)
    if args.k0 is None:
        raise UsageError("path needs --k0")
    V = _obtain_value(args, cfg)
    try:
        path = optimal_path(cfg.model, V, args.k0, _integrator(args))
        code = EXIT_OK
    except RangeExit as exc:
        if exc.path is None:
            raise UsageError(f"--k0: {exc}") from exc
        path, code = exc.path, EXIT_MODEL
    s = _path_outputs(writer, cfg.model, path, {"k0": args.k0, "value_function": V.domain},
                      "path_summary.json")
    print(f"termination={s['termination']} payoff={s.get('payoff')} "
          f"V(k0)={float(V.value(args.k0)):.10g}")
    return cfg.config_hash, code


def cmd_shoot(args, writer):
    cfg = _load(args)
    model = cfg.model
    if model.rck is None or model.rck.u_second is None:
        raise UsageError("shoot needs an RCK-form model (e.g. family = rck_cobb_douglas)")
    k0 = args.k0
    if k0 is None:
        k_ss = steady_state(model)
        if k_ss is None:
            raise UsageError("shoot needs --k0 (no steady state found)")
        k0 = 0.5 * k_ss
    c0 = args.c0
    source = "flag"
    if c0 is None:
        V = _obtain_value(args, cfg)
        c0 = maximize_hamiltonian(model, k0, float(V.deriv(k0))).c_star
        source = "value_function_policy"
    c0 = c0 + args.perturb
    if not c0 > 0:
        raise UsageError("--c0 plus --perturb must be > 0")
    path = euler_shooting(model, k0, c0, _integrator(args))
    s = _path_outputs(writer, model, path, {"k0": k0, "c0": c0, "perturb": args.perturb,
                                            "c0_source": source, "k_ss": steady_state(model),
                                            "t_final": float(path.times[-1]),
                                            "divergence_test": path.meta.get("divergence_test")},
                      "shoot_summary.json")
    print(f"termination={s['termination']} t_final={s['t_final']:.6g} k_final={path.capital[-1]:.10g}")
    return cfg.config_hash, EXIT_OK


def cmd_diagnose(args, writer):
    cfg = _load(args)
    if not args.path:
        raise UsageError("diagnose needs --path <path.csv>")
    if not os.path.isfile(args.path):
        raise UsageError(f"--path: no such file {args.path!r}")
    path = read_path_csv(args.path)
    V = None
    if args.value_dir:
        V = _obtain_value(args, cfg)
    try:
        rep = diagnose(cfg.model, path, V)
    except FormMismatch as exc:
        raise UsageError(str(exc)) from exc
    writer.write("diagnostics.json", _json_text(rep.to_dict()))
    for v in rep.verdicts:
        print(f"{v.name}: {'pass' if v.passed else 'fail'} (tol {v.tolerance:.3g})")
    return cfg.config_hash, (EXIT_OK if rep.ok else EXIT_MODEL)


def cmd_demo(args, writer):
    if args.which == "counterexample":
        rep = counterexample_suite(rho1=args.rho)
        d = rep.to_dict()
        writer.write("counterexample.json", _json_text(d))
        print(f"linear model u = c, F = k - c, rho = {args.rho:g}: candidates V(k) = a k")
        print(f"{'a':>6} {'max |HJB residual|':>20}")
        for a, r in rep.nonuniqueness_max_abs.items():
            print(f"{a:>6g} {r:>20.3e}")
        print(f"rho = 2 constant-fraction paths c = s k_bar (k_bar = {rep.k_bar:g})")
        print(f"{'s':>6} {'payoff':>14} {'exact':>10}")
        for s, p, e in zip(rep.bound_fractions, rep.bound_payoffs, rep.bound_exact):
            print(f"{s:>6g} {p:>14.9f} {e:>10.6g}")
        print(f"forced V = {rep.forced_v:g} k^2: V'({rep.forced_k:g}) = {rep.forced_dV:g} < 1: "
              f"{rep.contradiction}")
    else:
        rep = magic_of_capital_demo()
        writer.write("magic.json", _json_text(rep.to_dict()))
        print("path k = t^2/16, c = t/8 from k = 0, rho = 1, F = sqrt(k) - c, u = -1/sqrt(c)")
        print(f"{'payoff':>12} {rep.payoff:.8f}")
        print(f"{'closed form':>12} {rep.closed_form:.8f}")
        print(f"{'lower bound':>12} {rep.bound:.8f}")
        print(f"{'admissible':>12} max |dk/dt - F| = {rep.admissibility_residual:.3g}")
    return _argv_hash(args), EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _positive(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text!r}")
    return val


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML model definition")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hjb-growth", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("check", parents=[common], help="sampled assumption checks").set_defaults(func=cmd_check)
    sub.add_parser("solve", parents=[common], help="solve the HJB equation").set_defaults(func=cmd_solve)

    sp = sub.add_parser("policy", parents=[common], help="maximise the Hamiltonian at (k, p)")
    sp.add_argument("--k", type=_positive)
    sp.add_argument("--p", type=_positive)
    sp.set_defaults(func=cmd_policy)

    sp = sub.add_parser("path", parents=[common], help="integrate the optimal path")
    sp.add_argument("--k0", type=_positive)
    sp.add_argument("--t-end", type=_positive, default=100.0)
    sp.add_argument("--value-dir", help="reuse value.csv from a solve run")
    sp.set_defaults(func=cmd_path)

    sp = sub.add_parser("shoot", parents=[common], help="Euler-system shooting")
    sp.add_argument("--k0", type=_positive, help="default: half the steady state")
    sp.add_argument("--c0", type=_positive, help="default: the value-function policy at k0")
    sp.add_argument("--perturb", type=float, default=0.0)
    sp.add_argument("--t-end", type=_positive, default=100.0)
    sp.add_argument("--value-dir", help="reuse value.csv from a solve run")
    sp.set_defaults(func=cmd_shoot)

    sp = sub.add_parser("diagnose", parents=[common], help="Euler/transversality/HJB residuals of a path")
    sp.add_argument("--path", help="path.csv from a path or shoot run")
    sp.add_argument("--value-dir", help="value.csv directory for the HJB residual along the path")
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("demo", parents=[common], help="counterexample or magic-of-capital demo")
    sp.add_argument("which", choices=["counterexample", "magic"])
    sp.add_argument("--rho", type=_positive, default=1.0)
    sp.set_defaults(func=cmd_demo)
    return p


def run(argv=None):
    """Execute one subcommand and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    writer = _Writer(args.out)
    try:
        config_hash, code = args.func(args, writer)
    except UsageError as exc:
        print(f"hjb-growth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergence, DegenerateGrid, BracketFailure, StepFailure, RangeExit) as exc:
        print(f"hjb-growth {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    writer.manifest(args.command, config_hash, started)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line interface: ``fracsep <command> [options]``.

Commands
    ml        evaluate E_alpha(z) or E_{alpha,beta}(z)
    solve     t,x trajectory of the first initial value
    envelope  t,a_lower,a_upper coefficient envelope
    bounds    t,lower,upper separation bounds (or solution bounds for one x0)
    compare   measured separation next to classic and new bounds
    shoot     terminal value problem, JSON report

Exit status: 0 on success, 2 for invalid configuration or parameters,
3 when a solver or the shooting iteration fails.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import warnings

import numpy as np

from . import __version__
from .bounds import (
    classic_bounds,
    general_separation_bounds,
    linear_bounds,
    nonlinear_zero_bounds,
    separation_bounds,
)
from .config import load_config
from .envelope import (
    linear_coeff_envelope,
    lipschitz_from_envelope,
    nonlinear_coeff_envelope,
    running_sup_lipschitz,
    shifted_coeff_envelope,
)
from .errors import (
    BlowUpError,
    BracketExpansionError,
    FracSepError,
    MaxIterExceededError,
    NoConvergenceError,
)
from .mittag_leffler import ml2
from .shooting import TVProblem, solve_tvp
from .solvers import FracIVP, make_grid, solve_pi_trapezoidal

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3

SOLVER_ERRORS = (NoConvergenceError, BlowUpError, MaxIterExceededError, BracketExpansionError)


def fmt(v) -> str:
    """17 significant digits; infinities as ``inf`` / ``-inf``."""
    return format(float(v), ".17g")


def write_csv(stream, header, columns):
    stream.write(",".join(header) + "\n")
    for row in zip(*columns):
        stream.write(",".join(fmt(v) for v in row) + "\n")


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _solve(cfg, x0):
    return solve_pi_trapezoidal(FracIVP(cfg.alpha, cfg.rhs, x0, cfg.t_end), cfg.h)


def _envelope(cfg, times, x1=None):
    if cfg.kind == "linear-coeff":
        return linear_coeff_envelope(cfg.coefficient, times)
    if cfg.kind == "nonlinear":
        return nonlinear_coeff_envelope(cfg.rhs, times, cfg.box)
    if x1 is None:
        x1 = _solve(cfg, cfg.x0[0])
    return shifted_coeff_envelope(cfg.rhs, x1, cfg.box)


def _pair(cfg):
    if len(cfg.x0) != 2:
        raise FracSepError("this command needs two initial values: x0 = a, b")
    x10, x20 = sorted(cfg.x0)
    if x10 == x20:
        raise FracSepError("the two initial values must differ")
    return x10, x20


def _new_bounds(cfg, env, x10, x20):
    if cfg.kind == "linear-coeff":
        return linear_bounds(x20 - x10, cfg.alpha, env)
    if cfg.kind == "nonlinear":
        return separation_bounds(x10, x20, cfg.alpha, env)
    return general_separation_bounds(x10, x20, cfg.alpha, env)


def _grid(cfg):
    return make_grid(cfg.t_end, cfg.h)


def cmd_ml(args):
    if args.beta is None:
        value = ml2(args.alpha, 1.0, args.z)
    else:
        value = ml2(args.alpha, args.beta, args.z)
    print(fmt(value))


def cmd_solve(cfg, out):
    traj = _solve(cfg, cfg.x0[0])
    with _output(out) as fh:
        write_csv(fh, ("t", "x"), (traj.times, traj.values))


def cmd_envelope(cfg, out):
    env = _envelope(cfg, _grid(cfg))
    with _output(out) as fh:
        write_csv(fh, ("t", "a_lower", "a_upper"), (env.times, env.lower, env.upper))


def cmd_bounds(cfg, out):
    if len(cfg.x0) == 1:
        if cfg.kind == "shifted":
            raise FracSepError("shifted bounds need two initial values")
        env = _envelope(cfg, _grid(cfg))
        b = nonlinear_zero_bounds(cfg.x0[0], cfg.alpha, env)
    else:
        x10, x20 = _pair(cfg)
        x1 = _solve(cfg, x10) if cfg.kind == "shifted" else None
        env = _envelope(cfg, _grid(cfg), x1)
        b = _new_bounds(cfg, env, x10, x20)
    with _output(out) as fh:
        write_csv(fh, ("t", "lower", "upper"), (b.times, b.lower, b.upper))


def cmd_compare(cfg, out):
    x10, x20 = _pair(cfg)
    x1 = _solve(cfg, x10)
    x2 = _solve(cfg, x20)
    separation = np.abs(x2.values - x1.values)
    env = _envelope(cfg, x1.times, x1)
    if cfg.lipschitz is not None:
        lip = running_sup_lipschitz(cfg.lipschitz, x1.times)
    else:
        lip = lipschitz_from_envelope(env)
    classic = classic_bounds(x20 - x10, cfg.alpha, lip)
    new = _new_bounds(cfg, env, x10, x20)
    with _output(out) as fh:
        write_csv(
            fh,
            ("t", "separation", "lower_classic", "upper_classic", "lower_new", "upper_new"),
            (x1.times, separation, classic.lower, classic.upper, new.lower, new.upper),
        )


def cmd_shoot(cfg, out):
    s = cfg.shoot
    if s.target is None:
        raise FracSepError("shoot needs [shoot] target")
    problem = TVProblem(cfg.alpha, cfg.rhs, cfg.t_end, s.target, s.tol, s.max_iter)
    env = None
    if s.guided and cfg.kind != "shifted":
        env = _envelope(cfg, _grid(cfg))
    report = solve_tvp(problem, cfg.h, env)
    with _output(out) as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")


CONFIG_COMMANDS = {
    "solve": cmd_solve,
    "envelope": cmd_envelope,
    "bounds": cmd_bounds,
    "compare": cmd_compare,
    "shoot": cmd_shoot,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="experiment configuration file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default: stdout)")
    common.add_argument("--h", type=float, default=argparse.SUPPRESS, help="override the step size")

    parser = argparse.ArgumentParser(
        prog="fracsep", description="Separation bounds for scalar Caputo fractional differential equations."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="experiment configuration file")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--h", type=float, default=None, help="override the step size")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ml", parents=[common], help="evaluate the Mittag-Leffler function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--z", type=float, required=True)

    helps = {
        "solve": "solve the initial value problem (t,x CSV)",
        "envelope": "coefficient envelope (t,a_lower,a_upper CSV)",
        "bounds": "separation bounds (t,lower,upper CSV)",
        "compare": "measured separation against classic and new bounds",
        "shoot": "solve the terminal value problem by shooting (JSON)",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ml":
            cmd_ml(args)
            return EXIT_OK
        if args.config is None:
            parser.error(f"{args.command} needs --config")
        cfg = load_config(args.config, h_override=args.h)
        out = args.out if args.out is not None else cfg.output
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            CONFIG_COMMANDS[args.command](cfg, out)
    except SOLVER_ERRORS as exc:
        print(f"fracsep: error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FracSepError, ValueError) as exc:
        print(f"fracsep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fracsep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``wkbtrunc {solve,norms,sweep,nopt,rerun}``.

Every subcommand writes CSV: ``# key=value`` comment lines echoing the run
configuration (enough for ``wkbtrunc rerun`` to repeat it exactly), one
header row, then data rows.  Numbers are written in scientific notation with
as many significant digits as the working precision.

Exit codes: 0 success, 1 usage error, 2 numeric or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import shlex
import sys
import warnings

from mpmath import mp, mpf

from . import __version__
from .errors import ContractError, ExprSyntaxError, ResolutionWarning, UsageError, WKBError
from .experiments import (
    ProblemSpec,
    geometric_sweep,
    norm_rows,
    optimal_truncation_sweep,
    sweep_epsilon,
)
from .expr import Var, parse
from .jets import MIN_PRECISION, set_precision
from .oracle import airy_initial_data, oracle_grid, reference_for
from .truncation import least_term_N, oracle_optimal_N
from .wkb import IVProblem, build_phase_table, evaluate_on_grid, solve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

# flags that describe where results go rather than what was computed
_NOT_ECHOED = {"output", "figure", "command", "help", "file"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p, n_max_default=None):
    p.add_argument("--a", default="x", help="coefficient a(x), e.g. 'x' or '1+0.25*sin(10*x)'")
    p.add_argument("--interval", nargs=2, default=["1", "2"], metavar=("XI", "ETA"))
    p.add_argument("--M", type=int, default=64, help="Chebyshev degree (default 64)")
    p.add_argument("--precision", type=int, default=34, help=f"significant digits, >= {MIN_PRECISION}")
    p.add_argument("--N-max", dest="N_max", type=int, default=n_max_default, help="largest order in the phase table")
    p.add_argument("--output", "-o", help="CSV path (default: stdout)")
    p.add_argument("--figure", help="also render a matplotlib figure to this path")


def _initial_data(p):
    p.add_argument("--phi0", nargs=2, metavar=("RE", "IM"))
    p.add_argument("--phi1", nargs=2, metavar=("RE", "IM"), help="scaled derivative eps*phi'(xi)")
    p.add_argument("--airy-ic", dest="airy_ic", action="store_true", help="Ai + i Bi initial data (a = x)")


def _oracle(p):
    p.add_argument("--oracle", choices=["auto", "airy", "plane-wave", "ode"], default="auto")
    p.add_argument("--tol", help="ODE-oracle tolerance (default 1e(8-P))")
    p.add_argument("--grid", type=int, default=257, help="evaluation points (Chebyshev-distributed)")
    p.add_argument("--workers", type=int, default=1, help="process-pool size for sweeps")


def _eps_list(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eps", nargs="+", help="explicit, strictly decreasing eps values")
    g.add_argument("--eps-sweep", dest="eps_sweep", nargs=3, metavar=("START", "STOP", "COUNT"))


def build_parser():
    parser = _Parser(prog="wkbtrunc", description="Optimally truncated WKB solver and benchmark harness.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="evaluate phi_N^WKB and eps*phi' on a grid")
    _common(p)
    _initial_data(p)
    p.add_argument("--eps", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--N", type=int)
    g.add_argument("--auto-N", dest="auto_N", choices=["least-term", "oracle"])
    _oracle(p)

    p = sub.add_parser("norms", help="sup-norms of S_n' against sqrt(3) K2^n n^n")
    _common(p, n_max_default=30)

    p = sub.add_parser("sweep", help="sup-error for each (eps, N)")
    _common(p)
    _initial_data(p)
    _eps_list(p)
    p.add_argument("--N", nargs="+", type=int, default=[0, 1, 2, 3])
    _oracle(p)

    p = sub.add_parser("nopt", help="optimal truncation order and error per eps")
    _common(p)
    _initial_data(p)
    _eps_list(p)
    _oracle(p)

    p = sub.add_parser("rerun", help="repeat the run recorded in a CSV header")
    p.add_argument("file")
    p.add_argument("--output", "-o")
    p.add_argument("--figure")
    return parser


def fmt(value, digits=None):
    """Decimal scientific notation with ``digits`` (default: precision) digits."""
    if isinstance(value, int):
        return str(value)
    value = mpf(value)
    if mp.isinf(value):
        return "inf" if value > 0 else "-inf"
    if mp.isnan(value):
        return "nan"
    digits = digits or mp.dps
    if not value:
        return "0." + "0" * (digits - 1) + "e+0"
    text = mp.nstr(value, digits, min_fixed=0, max_fixed=0, strip_zeros=False)
    if "e" not in text:
        text += "e+0"
    return text


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def config_lines(parser, args):
    """``key=value`` strings describing ``args`` (one per effective option)."""
    lines = [f"command={args.command}"]
    for action in _subparser(parser, args.command)._actions:
        key = action.dest
        if key in _NOT_ECHOED or not action.option_strings:
            continue
        value = getattr(args, key, None)
        if value is None or value is False:
            continue
        if value is True:
            lines.append(f"{key}=true")
        elif isinstance(value, (list, tuple)):
            lines.append(f"{key}={shlex.join(str(v) for v in value)}")
        else:
            lines.append(f"{key}={shlex.join([str(value)])}")
    return lines


def argv_from_header(parser, text):
    """Rebuild an argv list from the ``# key=value`` lines of a CSV file."""
    items = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].strip().partition("=")
        if sep:
            items[key.strip()] = value
    command = items.pop("command", None)
    if command is None:
        raise UsageError("no '# command=...' line in the file header")
    try:
        sub = _subparser(parser, command)
    except KeyError:
        raise UsageError(f"unknown command {command!r} in header") from None
    by_dest = {a.dest: a for a in sub._actions if a.option_strings}
    argv = [command]
    for key, value in items.items():
        action = by_dest.get(key)
        if action is None or key in _NOT_ECHOED:
            continue  # derived result lines
        flag = action.option_strings[-1] if action.option_strings[-1].startswith("--") else action.option_strings[0]
        if action.nargs == 0:
            if value == "true":
                argv.append(flag)
        else:
            argv.append(flag)
            argv.extend(shlex.split(value))
    return argv


def _write_csv(out, header_lines, columns, rows):
    for line in header_lines:
        out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def _pair(values, name):
    if values is None:
        return None
    try:
        return (mpf(values[0]), mpf(values[1]))
    except (ValueError, TypeError):
        raise UsageError(f"--{name} needs two real numbers, got {values}") from None


def _problem_spec(args):
    a = parse(args.a)
    if args.airy_ic:
        if not isinstance(a, Var):
            raise UsageError("--airy-ic requires --a x")
        if args.phi0 or args.phi1:
            raise UsageError("--airy-ic cannot be combined with --phi0/--phi1")
    elif args.phi0 is None or args.phi1 is None:
        raise UsageError("give --phi0 and --phi1, or --airy-ic")
    if args.oracle == "airy" and not args.airy_ic:
        raise UsageError("--oracle airy requires --airy-ic")
    return ProblemSpec(
        args.a,
        tuple(args.interval),
        _pair(args.phi0, "phi0"),
        _pair(args.phi1, "phi1"),
        args.airy_ic,
        args.oracle,
        mpf(args.tol) if args.tol else None,
    )


def _eps_values(args):
    if args.eps_sweep:
        start, stop, count = args.eps_sweep
        try:
            count = int(count)
        except ValueError:
            raise UsageError(f"sweep count must be an integer, got {count!r}") from None
        return geometric_sweep(start, stop, count)
    values = [mpf(e) for e in args.eps]
    if any(b >= a for a, b in zip(values, values[1:])):
        raise UsageError("--eps values must be strictly decreasing")
    return values


def _default_n_max(eps):
    # N_opt * eps stays O(1); 1.75/eps leaves headroom above the Airy value ~1.4
    return max(8, int(math.ceil(7 / (4 * float(eps)))))


def _run_solve(args, results):
    spec = _problem_spec(args)
    problem = spec.problem(args.eps)
    points = oracle_grid(problem.interval, args.grid)
    if args.N is not None:
        if args.N < 0:
            raise UsageError("--N must be nonnegative")
        N = args.N
        table = build_phase_table(problem.a, problem.interval, max(N, args.N_max or 0), args.M)
    else:
        n_max = args.N_max or _default_n_max(problem.eps)
        table = build_phase_table(problem.a, problem.interval, n_max, args.M)
        if args.auto_N == "least-term":
            report = least_term_N(table, problem.eps)
        else:
            report = oracle_optimal_N(problem, table, reference_for(problem, points, spec.oracle, spec.tol))
        N = report.N_selected
        results.append(f"result.selection_score={fmt(report.best_score, 6)}")
        if report.at_boundary:
            results.append("result.at_boundary=true")
    results.append(f"result.N={N}")
    sol = solve(problem, N, table)
    phi, dphi = evaluate_on_grid(sol, points)
    rows = [(x, p.real, p.imag, d.real, d.imag) for x, p, d in zip(points, phi, dphi)]
    return ["x", "re_phi", "im_phi", "re_eps_dphi", "im_eps_dphi"], rows


def _run_norms(args, results):
    table = build_phase_table(args.a, args.interval, args.N_max, args.M)
    return ["n", "sup_norm_Snprime", "bound_sqrt3_K2n_nn"], norm_rows(table)


def _run_sweep(args, results):
    spec = _problem_spec(args)
    eps = _eps_values(args)
    if min(args.N) < 0:
        raise UsageError("--N values must be nonnegative")
    n_max = max(max(args.N), args.N_max or 0)
    table = build_phase_table(args.a, args.interval, n_max, args.M)
    rows = sweep_epsilon(table, spec, eps, args.N, args.grid, args.workers)
    return ["eps", "N", "sup_error"], rows


def _run_nopt(args, results):
    spec = _problem_spec(args)
    eps = _eps_values(args)
    n_max = args.N_max or _default_n_max(min(eps))
    table = build_phase_table(args.a, args.interval, n_max, args.M)
    out = optimal_truncation_sweep(table, spec, eps, args.grid, args.workers)
    at_boundary = [fmt(r[0], 6) for r in out if r[4].at_boundary]
    if at_boundary:
        results.append(f"result.N_max_reached_at_eps={' '.join(at_boundary)}")
    return ["eps", "N_opt", "optimal_error", "envelope"], [r[:4] for r in out]


_RUNNERS = {"solve": _run_solve, "norms": _run_norms, "sweep": _run_sweep, "nopt": _run_nopt}


def _render_figure(command, rows, path):
    from . import plotting

    {
        "solve": plotting.plot_solution,
        "norms": plotting.plot_norms,
        "sweep": plotting.plot_sweep,
        "nopt": plotting.plot_nopt,
    }[command](rows, path)


def execute(parser, args, out):
    """Run a parsed command and write its CSV to the text stream ``out``."""
    set_precision(args.precision)
    results = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        columns, rows = _RUNNERS[args.command](args, results)
    caught = [w for w in caught if issubclass(w.category, ResolutionWarning)]
    for w in caught:
        print(f"wkbtrunc: warning: {w.message}", file=sys.stderr)
    header = [f"wkbtrunc_version={__version__}"] + config_lines(parser, args) + results
    header += [f"warning={shlex.join([str(w.message)])}" for w in caught]
    _write_csv(out, header, columns, rows)
    if args.figure:
        _render_figure(args.command, rows, args.figure)
    return rows


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    old_dps = mp.dps
    try:
        if args.command == "rerun":
            with open(args.file, encoding="utf-8") as fh:
                rerun_argv = argv_from_header(parser, fh.read())
            output, figure = args.output, args.figure
            args = parser.parse_args(rerun_argv)
            args.output, args.figure = output, figure
        buffer = io.StringIO()
        execute(parser, args, buffer)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(buffer.getvalue())
        else:
            sys.stdout.write(buffer.getvalue())
        return EXIT_OK
    except (UsageError, ContractError, ExprSyntaxError) as exc:
        print(f"wkbtrunc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WKBError as exc:
        print(f"wkbtrunc: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"wkbtrunc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        mp.dps = old_dps


if __name__ == "__main__":
    sys.exit(main())

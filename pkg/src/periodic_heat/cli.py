"""Command line entry point: ``study``, ``solve`` and ``bounds`` subcommands."""
import argparse
import csv
import logging
import math
import sys
from dataclasses import asdict

from .bounds import BoundInputs, bound_report
from .dense_linalg import generalized_eig
from .fem_space import assemble, space_constants
from .manufactured import ManufacturedProblem, f_norm_analytic
from .periodic_solver import SemidiscreteSystem, TimeGrid, solve_periodic
from .quadrature import TimeQuadrature
from .study import ConfigError, StudyConfig, StudyError, emit_csv, format_csv, run_study


def _float_list(text):
    try:
        return [float(eval_pi(v)) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def eval_pi(text):
    """Parse a float, also accepting multiples of pi such as ``0.5pi`` or ``pi``."""
    s = text.strip().lower()
    if s.endswith("pi"):
        head = s[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(s)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="periodic-heat",
        description="Time-periodic heat equation: full-discrete solver, a priori bounds, convergence study.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="run the convergence study and write CSV")
    st.add_argument("--config", help="JSON file with StudyConfig fields")
    st.add_argument("--out", help="output CSV path (default: config 'output' or stdout)")
    st.add_argument("--nu", dest="nu_list", type=_float_list, help="comma-separated viscosities")
    st.add_argument("--beta", dest="beta_list", type=_float_list, help="comma-separated phases (e.g. 0,0.5pi)")
    st.add_argument("--n", dest="n_list", type=_int_list, help="comma-separated element counts")
    st.add_argument("--m", dest="m_list", type=_int_list, help="explicit time-step counts, one per n")
    st.add_argument("--quad-order", dest="quad_order", type=int)
    st.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for reproducible output")

    so = sub.add_parser("solve", help="solve the manufactured problem and dump nodal coefficients")
    so.add_argument("--nu", type=float, required=True)
    so.add_argument("--beta", type=eval_pi, default=0.0)
    so.add_argument("--n", type=int, required=True, help="number of elements")
    so.add_argument("--m", type=int, required=True, help="number of time steps")
    so.add_argument("--out", required=True)
    so.add_argument("--time-quad-order", type=int, default=5)

    bo = sub.add_parser("bounds", help="print the constants and a priori bounds")
    bo.add_argument("--nu", type=float, required=True)
    bo.add_argument("--T", type=float, default=1.0)
    bo.add_argument("--n", type=int, required=True, help="number of elements")
    bo.add_argument("--m", type=int, required=True, help="number of time steps")
    bo.add_argument("--f-norm", type=float,
                    help="L2(L2) norm of the forcing (default: the manufactured forcing, T=1 only)")
    return parser


def _cmd_study(args):
    cfg = StudyConfig.from_json(args.config) if args.config else StudyConfig()
    data = asdict(cfg)
    for key in ("nu_list", "beta_list", "n_list", "m_list", "quad_order"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.out:
        data["output"] = args.out
    cfg = StudyConfig.from_dict(data)
    try:
        rows = run_study(cfg, timing=not args.no_timing)
        failure = None
    except StudyError as exc:
        rows, failure = exc.rows, exc
    if cfg.output:
        emit_csv(rows, cfg.output)
    else:
        sys.stdout.write(format_csv(rows))
    if failure is not None:
        raise failure
    return 0


def _cmd_solve(args):
    fem = assemble(args.n)
    problem = ManufacturedProblem(args.nu, args.beta)
    system = SemidiscreteSystem(fem, args.nu, problem.T, problem.forcing)
    grid = TimeGrid(args.m, problem.T)
    sol = solve_periodic(system, grid, TimeQuadrature(order=args.time_quad_order))
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["j", "t"] + [f"x={x:.17g}" for x in fem.mesh.nodes])
            for j, t in enumerate(grid.times):
                writer.writerow([j, format(t, ".17g")] + [format(c, ".17g") for c in sol.coeffs[:, j]])
    except OSError as exc:
        raise OSError(f"cannot write solution CSV to {args.out}: {exc}") from exc
    return 0


def _cmd_bounds(args):
    fem = assemble(args.n)
    grid = TimeGrid(args.m, args.T)
    if args.f_norm is None:
        if args.T != 1.0:
            raise ValueError("--f-norm is required when T != 1")
        f_norm = f_norm_analytic(ManufacturedProblem(args.nu))
    else:
        f_norm = args.f_norm
    sc = space_constants(fem.mesh)
    decomp = generalized_eig(fem.stiffness, fem.mass)
    inputs = BoundInputs(args.nu, args.T, sc.lambda1, sc.c_p, sc.c_omega, sc.c_inv, grid.c_j, f_norm)
    report = bound_report(inputs, decomp, fem)
    lines = {
        "nu": args.nu, "T": args.T, "n": args.n, "m": args.m, "h": fem.mesh.h, "k": grid.k,
        "f_norm": f_norm, "mu_min": decomp.mu_min,
        "kappa1": report.kappa1, "K1": report.K1, "K2": report.K2,
        "h1_bound": report.h1_bound, "l2_bound": report.l2_bound,
    }
    for key, value in asdict(report.continuous).items():
        lines[f"continuous.{key}"] = value
    lines["rigorous"] = report.rigorous
    lines["underflow_clamped"] = report.underflow_clamped
    for key, value in lines.items():
        if isinstance(value, float):
            value = format(value, ".17g")
        print(f"{key}={value}")
    for note in report.notes:
        print(f"note={note}")
    return 0


_COMMANDS = {"study": _cmd_study, "solve": _cmd_solve, "bounds": _cmd_bounds}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, StudyError, ValueError, ArithmeticError, OSError) as exc:
        print(f"periodic-heat {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

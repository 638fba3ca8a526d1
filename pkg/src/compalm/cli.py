"""Command-line front end.

Subcommands::

    compalm solve {rosenbrock,portfolio,matrix} [...]
    compalm bench-rosenbrock [--no-accel] [--full-noaccel] [...]
    compalm bench-portfolio [--seeds 1-20] [--n 50] [--alpha 0.01] [--p 0.5]
    compalm bench-matrix [--seeds 1-10] [--N 10] [--p 0.5]
    compalm gen-instance portfolio --seed S [--n 50] [--alpha A] --out FILE

Exit codes: 0 solved, 2 max_outer, 3 infeasible_suspect, 4 inner_failure,
64 usage error. Bench commands exit 0 and record statuses per row.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import bench
from .alm import STATUSES, AlmOptions, AlmReport, alm_solve
from .panoc import PanocOptions
from .problems.io import InstanceFormatError, format_portfolio, read_portfolio_file
from .problems.matrix_completion import gen_matrix_completion, matrix_completion_problem, random_start
from .problems.portfolio import REGULARIZERS, gen_portfolio, portfolio_problem
from .problems.rosenbrock import rosenbrock_problem

EXIT_CODES = {"solved": 0, "max_outer": 2, "infeasible_suspect": 3, "inner_failure": 4}
EXIT_USAGE = 64
assert set(EXIT_CODES) == set(STATUSES)

PROBLEMS = ("rosenbrock", "portfolio", "matrix")
MATRIX_REGULARIZERS = ("rank", "nuclear", "schatten")

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["problem", "status", "primal", "dual", "q", "outer_iterations", "inner_iterations", "x", "y", "trace"],
    "properties": {
        "problem": {"type": "string"},
        "status": {"enum": list(STATUSES)},
        "message": {"type": "string"},
        "primal": {"type": ["number", "null"]},
        "dual": {"type": ["number", "null"]},
        "q": {"type": ["number", "null"]},
        "outer_iterations": {"type": "integer", "minimum": 0},
        "inner_iterations": {"type": "integer", "minimum": 0},
        "x": {"type": "array", "items": {"type": "number"}},
        "y": {"type": "array", "items": {"type": "number"}},
        "trace": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["k", "infeas", "eps_k", "mu_min", "inner_iterations", "inner_residual", "q"],
                "properties": {
                    "k": {"type": "integer", "minimum": 0},
                    "infeas": {"type": ["number", "null"]},
                    "eps_k": {"type": "number"},
                    "mu_min": {"type": "number"},
                    "inner_iterations": {"type": "integer", "minimum": 0},
                    "inner_residual": {"type": ["number", "null"]},
                    "q": {"type": ["number", "null"]},
                },
            },
        },
    },
}

TRACE_COLUMNS = ["k", "infeas", "eps_k", "mu_min", "inner_iterations", "inner_residual", "q"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_seeds(text: str) -> List[int]:
    """``"1-5,8"`` -> ``[1, 2, 3, 4, 5, 8]``."""
    seeds = []
    for part in text.split(","):
        m = re.fullmatch(r"\s*(\d+)\s*(?:-\s*(\d+)\s*)?", part)
        if not m:
            raise argparse.ArgumentTypeError(f"invalid seed list {text!r}")
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) else lo
        if hi < lo:
            raise argparse.ArgumentTypeError(f"invalid seed range {part!r}")
        seeds.extend(range(lo, hi + 1))
    return sorted(set(seeds))


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid vector {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    d = AlmOptions()
    p.add_argument("--tol-prim", type=float, default=d.eps_prim, help="primal tolerance")
    p.add_argument("--tol-dual", type=float, default=d.eps_dual, help="dual (stationarity) tolerance")
    p.add_argument("--max-outer", type=int, default=d.max_outer, help="outer iteration limit")
    p.add_argument("--no-accel", action="store_true", help="disable LBFGS acceleration")
    p.add_argument("--lbfgs-mem", type=int, default=d.inner.memory, help="LBFGS memory")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="compalm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one registered problem")
    p.add_argument("problem", help=f"one of {', '.join(PROBLEMS)}")
    _common(p)
    p.set_defaults(format="json")
    p.add_argument("--x0", type=parse_vector, help="comma-separated starting point")
    p.add_argument("--file", help="portfolio instance file")
    p.add_argument("--reg", help="regularizer (portfolio: l0, l1, lp; matrix: rank, nuclear, schatten)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n", type=int, default=50, help="assets for a generated portfolio")
    p.add_argument("--N", type=int, default=10, help="points for matrix completion")
    p.add_argument("--ell", type=int, default=5, help="latent dimension for matrix completion")
    p.add_argument("--alpha", type=float, help="sparsity weight (portfolio)")
    p.add_argument("--p", type=float, default=0.5, help="quasi-norm exponent")

    p = sub.add_parser("bench-rosenbrock", help="grid sweep on the either-or Rosenbrock problem")
    _common(p)
    p.add_argument("--full-noaccel", action="store_true", help="unaccelerated runs on the full 11x11 grid")
    p.add_argument("--noaccel-budget", type=int, default=bench.NOACCEL_BUDGET,
                   help="cumulative inner iteration cap per unaccelerated run (0: none)")

    p = sub.add_parser("bench-portfolio", help="sparse portfolio continuation study")
    _common(p)
    p.add_argument("--seeds", type=parse_seeds, default=list(range(1, 21)))
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--alpha", type=float, default=bench.PORTFOLIO_ALPHA)
    p.add_argument("--p", type=float, default=0.5)

    p = sub.add_parser("bench-matrix", help="low-rank matrix completion study")
    _common(p)
    p.add_argument("--seeds", type=parse_seeds, default=list(range(1, 11)))
    p.add_argument("--N", type=int, nargs="+", default=[10])
    p.add_argument("--ell", type=int, default=5)
    p.add_argument("--p", type=float, default=0.5)

    p = sub.add_parser("gen-instance", help="write a generated portfolio instance file")
    p.add_argument("kind", choices=("portfolio",))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--alpha", type=float, default=bench.PORTFOLIO_ALPHA)
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def options_from_args(args) -> AlmOptions:
    if args.tol_prim <= 0 or args.tol_dual <= 0 or args.max_outer < 1 or args.lbfgs_mem < 1:
        raise UsageError("tolerances, --max-outer and --lbfgs-mem must be positive")
    inner = PanocOptions(acceleration="none" if args.no_accel else "lbfgs", memory=args.lbfgs_mem)
    return AlmOptions(eps_prim=args.tol_prim, eps_dual=args.tol_dual, max_outer=args.max_outer, inner=inner)


def report_to_json(problem: str, rep: AlmReport) -> dict:
    cell = bench.json_cell
    return {
        "problem": problem,
        "status": rep.status,
        "message": rep.message,
        "primal": cell(rep.primal),
        "dual": cell(rep.dual),
        "q": cell(rep.q),
        "outer_iterations": rep.outer_iterations,
        "inner_iterations": rep.inner_iterations,
        "x": [float(v) for v in rep.x],
        "y": [float(v) for v in rep.y],
        "trace": [{c: cell(getattr(row, c)) for c in TRACE_COLUMNS} for row in rep.trace],
    }


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def run_solve(args) -> int:
    opts = options_from_args(args)
    name = args.problem
    if name == "rosenbrock":
        problem = rosenbrock_problem()
        x0 = np.array([-5.0, 5.0]) if args.x0 is None else args.x0
    elif name == "portfolio":
        reg = args.reg or "l0"
        if reg not in REGULARIZERS:
            raise UsageError(f"unknown portfolio regularizer {reg!r}")
        inst = read_portfolio_file(args.file) if args.file else gen_portfolio(args.seed, args.n, bench.PORTFOLIO_ALPHA)
        problem = portfolio_problem(inst, reg, alpha=args.alpha, p=args.p)
        x0 = np.full(inst.n, 1.0 / inst.n) if args.x0 is None else args.x0
    elif name == "matrix":
        reg = args.reg or "nuclear"
        if reg not in MATRIX_REGULARIZERS:
            raise UsageError(f"unknown matrix regularizer {reg!r}")
        inst = gen_matrix_completion(args.seed, args.N, args.ell)
        problem = matrix_completion_problem(inst, reg, args.p)
        x0 = random_start(args.seed, args.N) if args.x0 is None else args.x0
    else:
        raise UsageError(f"unknown problem {name!r}; expected one of {', '.join(PROBLEMS)}")
    if x0.shape != (problem.n,):
        raise UsageError(f"--x0 must have {problem.n} entries")

    rep = alm_solve(problem, x0, opts=opts)
    if args.format == "json":
        _emit(_dump_json(report_to_json(name, rep)), args.out)
    else:
        table = bench.Table(TRACE_COLUMNS, [{c: getattr(r, c) for c in TRACE_COLUMNS} for r in rep.trace])
        _emit(table.to_csv(), args.out)
    print(f"{name}: {rep.status} (primal {rep.primal:.3g}, dual {rep.dual:.3g}, "
          f"{rep.outer_iterations} outer / {rep.inner_iterations} inner)", file=sys.stderr)
    return EXIT_CODES[rep.status]


def run_bench(args) -> int:
    opts = options_from_args(args)
    if args.command == "bench-rosenbrock":
        budget = args.noaccel_budget if args.noaccel_budget > 0 else None
        table = bench.bench_rosenbrock(opts, args.full_noaccel, budget, accelerated=not args.no_accel)
    elif args.command == "bench-portfolio":
        table = bench.bench_portfolio(args.seeds, args.n, args.alpha, args.p, opts)
    else:
        table = bench.bench_matrix(args.seeds, args.N, args.ell, args.p, opts)
    if args.format == "json":
        _emit(_dump_json({"command": args.command, **table.to_json()}), args.out)
    else:
        _emit(table.to_csv(), args.out)
    return 0


def run_gen(args) -> int:
    inst = gen_portfolio(args.seed, args.n, args.alpha)
    _emit(format_portfolio(inst), args.out)
    return 0


def _normalize_argv(argv: Sequence[str]) -> List[str]:
    # Let vector arguments start with a minus sign: "--x0 -5,5".
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--x0":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--x0={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_normalize_argv(argv))
        if args.command == "solve":
            return run_solve(args)
        if args.command == "gen-instance":
            return run_gen(args)
        return run_bench(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, OSError) as exc:
        print(f"compalm: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

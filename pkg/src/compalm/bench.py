"""Benchmark sweeps producing plain result tables.

Every sweep returns a :class:`Table` whose rows are sorted by a
deterministic key, so the emitted CSV depends only on the configuration.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .alm import AlmOptions, AlmReport, alm_solve
from .problems.matrix_completion import gen_matrix_completion, matrix_completion_problem, random_start
from .problems.portfolio import gen_portfolio, portfolio_problem
from .problems.rosenbrock import rosenbrock_problem
from .smallalg import numerical_rank, svd_dense

NONZERO_TOL = 1e-8
ROSENBROCK_GRID = np.linspace(-5.0, 5.0, 11)
# grid indices of the default unaccelerated sub-grid: {-5, 0, 5}^2
NOACCEL_SUBGRID = (0, 5, 10)
NOACCEL_BUDGET = 50_000


@dataclass
class Table:
    columns: List[str]
    rows: List[Dict[str, object]] = field(default_factory=list)

    def column(self, name: str, **where) -> list:
        return [r[name] for r in self.rows if all(r[k] == v for k, v in where.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"columns": self.columns, "rows": [{c: json_cell(r[c]) for c in self.columns} for r in self.rows]}


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def with_acceleration(opts: AlmOptions, accelerated: bool, memory: Optional[int] = None) -> AlmOptions:
    inner = replace(opts.inner, acceleration="lbfgs" if accelerated else "none")
    if memory is not None:
        inner = replace(inner, memory=memory)
    return replace(opts, inner=inner)


# ---------------------------------------------------------------------------
# Rosenbrock


ROSENBROCK_COLUMNS = ["mode", "i", "j", "x0_1", "x0_2", "status", "x_1", "x_2", "dist", "outer", "inner"]


def bench_rosenbrock(
    opts: Optional[AlmOptions] = None,
    full_noaccel: bool = False,
    noaccel_budget: Optional[int] = NOACCEL_BUDGET,
    accelerated: bool = True,
    unaccelerated: bool = True,
) -> Table:
    """Solve from the 11 x 11 grid on ``[-5, 5]^2`` with LBFGS, and from the
    3 x 3 sub-grid (or the full grid) without acceleration.

    Either group can be switched off. Unaccelerated runs stop once
    ``noaccel_budget`` cumulative inner iterations are spent (``None``: no
    limit); their ``inner`` count is then a lower bound on the true count.
    """
    opts = opts or AlmOptions()
    problem = rosenbrock_problem()
    table = Table(ROSENBROCK_COLUMNS)
    grid = range(len(ROSENBROCK_GRID))
    runs = []
    if accelerated:
        runs += [("lbfgs", i, j) for i in grid for j in grid]
    if unaccelerated:
        sub = grid if full_noaccel else NOACCEL_SUBGRID
        runs += [("none", i, j) for i in sub for j in sub]
    plain = replace(with_acceleration(opts, False), max_inner_total=noaccel_budget)
    fast = with_acceleration(opts, True)
    for mode, i, j in runs:
        x0 = np.array([ROSENBROCK_GRID[i], ROSENBROCK_GRID[j]])
        rep = alm_solve(problem, x0, opts=fast if mode == "lbfgs" else plain)
        table.rows.append(
            dict(
                mode=mode, i=i, j=j, x0_1=x0[0], x0_2=x0[1], status=rep.status,
                x_1=rep.x[0], x_2=rep.x[1], dist=float(np.linalg.norm(rep.x)),
                outer=rep.outer_iterations, inner=rep.inner_iterations,
            )
        )
    table.rows.sort(key=lambda r: (r["mode"] != "lbfgs", r["i"], r["j"]))
    return table


# ---------------------------------------------------------------------------
# Portfolio


PORTFOLIO_COLUMNS = [
    "seed", "method", "status", "nnz", "objective", "objective_l0",
    "budget_res", "return_res", "bound_res", "primal", "dual", "outer", "inner",
]
PORTFOLIO_METHODS = ("l0", "l1", "l1>l0", "lp", "lp>l0")
PORTFOLIO_ALPHA = 0.01


def portfolio_runs(inst, opts: AlmOptions, p: float = 0.5) -> Dict[str, AlmReport]:
    """Direct l0 solve and the l1 / lp continuations into l0, all starting
    from the simplex center."""
    x0 = np.full(inst.n, 1.0 / inst.n)
    l0 = portfolio_problem(inst, "l0")
    runs = {"l0": alm_solve(l0, x0, opts=opts)}
    for reg in ("l1", "lp"):
        first = alm_solve(portfolio_problem(inst, reg, p=p), x0, opts=opts)
        runs[reg] = first
        runs[reg + ">l0"] = alm_solve(l0, first.x, first.y, opts=opts)
    return runs


def portfolio_row(inst, seed: int, method: str, rep: AlmReport, p: float) -> dict:
    x = rep.x
    reg = method.split(">")[-1]
    return dict(
        seed=seed, method=method, status=rep.status,
        nnz=int(np.count_nonzero(np.abs(x) > NONZERO_TOL)),
        objective=inst.objective(x, reg, p), objective_l0=inst.objective(x, "l0"),
        budget_res=abs(float(x.sum()) - 1.0),
        return_res=max(0.0, inst.rho - float(inst.mean @ x)),
        bound_res=float(max(0.0, (-x).max(), (x - inst.u).max())),
        primal=rep.primal, dual=rep.dual, outer=rep.outer_iterations, inner=rep.inner_iterations,
    )


def bench_portfolio(
    seeds: Sequence[int], n: int = 50, alpha: float = PORTFOLIO_ALPHA, p: float = 0.5,
    opts: Optional[AlmOptions] = None,
) -> Table:
    opts = opts or AlmOptions()
    table = Table(PORTFOLIO_COLUMNS)
    for seed in sorted(seeds):
        inst = gen_portfolio(seed, n, alpha)
        runs = portfolio_runs(inst, opts, p)
        for method in PORTFOLIO_METHODS:
            table.rows.append(portfolio_row(inst, seed, method, runs[method], p))
    return table


# ---------------------------------------------------------------------------
# Matrix completion


MATRIX_COLUMNS = ["seed", "N", "method", "status", "primal", "dual", "rank", "source_rank", "outer", "inner"]
MATRIX_METHODS = ("rank", "nuclear", "schatten", "nuclear>rank", "schatten>rank")


def solution_rank(x: np.ndarray, N: int) -> int:
    return numerical_rank(svd_dense(x.reshape(N, N)).sigma, (N, N))


def bench_matrix(
    seeds: Sequence[int], sizes: Sequence[int] = (10,), ell: int = 5, p: float = 0.5,
    opts: Optional[AlmOptions] = None,
) -> Table:
    """Direct rank minimization, nuclear norm and Schatten-``p``, and rank
    minimization warm-started from the latter two. ``source_rank`` is the
    rank of the warm start (-1 for cold starts)."""
    opts = opts or AlmOptions()
    table = Table(MATRIX_COLUMNS)
    for N in sorted(sizes):
        for seed in sorted(seeds):
            inst = gen_matrix_completion(seed, N, ell)
            x0 = random_start(seed, N)
            rank_problem = matrix_completion_problem(inst, "rank")
            reps, ranks = {}, {}
            for reg in ("rank", "nuclear", "schatten"):
                reps[reg] = alm_solve(matrix_completion_problem(inst, reg, p), x0, opts=opts)
                ranks[reg] = solution_rank(reps[reg].x, N)
            for reg in ("nuclear", "schatten"):
                key = reg + ">rank"
                reps[key] = alm_solve(rank_problem, reps[reg].x, reps[reg].y, opts=opts)
                ranks[key] = solution_rank(reps[key].x, N)
            for method in MATRIX_METHODS:
                rep = reps[method]
                source = method.split(">")[0] if ">" in method else None
                table.rows.append(
                    dict(
                        seed=seed, N=N, method=method, status=rep.status, primal=rep.primal,
                        dual=rep.dual, rank=ranks[method],
                        source_rank=ranks[source] if source else -1,
                        outer=rep.outer_iterations, inner=rep.inner_iterations,
                    )
                )
    return table

"""Safeguarded augmented Lagrangian method over the slack-lifted problem.

The constraint ``c(x) in D`` is rewritten as ``c(x) - s = 0, s in D``. Each
outer iteration minimizes, up to a tolerance ``eps_k``, the augmented
Lagrangian

    f(x) + g(x) + indicator_D(s) + sum_i (c_i(x) + mu_i yhat_i - s_i)^2 / (2 mu_i)
                                 - sum_i mu_i yhat_i^2 / 2

over ``(x, s)`` with PANOC+, then updates the multipliers, the penalty
vector ``mu`` and the inner tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from .core import NumericalError, OracleError, Problem, check_array, check_scalar, eval_q
from .panoc import CompositeProblem, PanocOptions, panoc_solve

Array = np.ndarray

EPS_MACHINE = float(np.finfo(float).eps)

STATUSES = ("solved", "max_outer", "infeasible_suspect", "inner_failure")


@dataclass(frozen=True)
class AlmOptions:
    """Outer-loop parameters.

    ``safeguard`` optionally replaces the default clamp of the multipliers
    to ``[-y_max, y_max]``; it receives ``(y, y_max)``. ``mu0`` overrides
    the automatic initial penalty vector. ``max_inner_total`` caps the
    cumulative number of inner iterations (``None``: unlimited); running out
    ends the solve with status ``max_outer``.
    """

    eps_prim: float = 1e-6
    eps_dual: float = 1e-6
    theta: float = 0.8
    kappa_mu: float = 0.5
    kappa_eps: float = 0.1
    y_max: float = 1e20
    max_outer: int = 100
    mu_bounds: Tuple[float, float] = (1e-8, 1e8)
    mu_floor: float = 1e-12
    stall_window: int = 3
    inner: PanocOptions = field(default_factory=PanocOptions)
    safeguard: Optional[Callable[[Array, float], Array]] = None
    mu0: Optional[Array] = None
    max_inner_total: Optional[int] = None

    def __post_init__(self):
        if not (self.eps_prim > 0 and self.eps_dual > 0 and self.y_max > 0 and self.mu_floor > 0):
            raise ValueError("tolerances, y_max and mu_floor must be positive")
        for name in ("theta", "kappa_mu", "kappa_eps"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        lo, hi = self.mu_bounds
        if not 0 < lo <= hi:
            raise ValueError("invalid mu_bounds")
        if self.max_outer < 1 or self.stall_window < 1:
            raise ValueError("max_outer and stall_window must be positive")
        if self.max_inner_total is not None and self.max_inner_total < 1:
            raise ValueError("max_inner_total must be positive")


@dataclass
class AlmState:
    x: Array
    s: Array
    y: Array
    y_hat: Array
    mu: Array
    eps_k: float
    prev_infeas: float = math.inf
    k: int = 0
    inner_iterations: int = 0


@dataclass(frozen=True)
class TraceRow:
    """One outer iteration. ``zeta = s - c(x)`` and the inner residual are
    the approximate stationarity certificates of the iterate."""

    k: int
    infeas: float
    eps_k: float
    mu_min: float
    inner_iterations: int
    inner_residual: float
    q: float


@dataclass
class AlmReport:
    status: str
    x: Array
    s: Array
    y: Array
    primal: float
    dual: float
    q: float
    outer_iterations: int
    inner_iterations: int
    trace: List[TraceRow] = field(default_factory=list)
    message: str = ""

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def safeguard(y: Array, y_max: float) -> Array:
    """Clamp multipliers to the box ``[-y_max, y_max]``."""
    return np.clip(y, -y_max, y_max)


def dual_update(y_hat: Array, c_val: Array, s: Array, mu: Array) -> Array:
    return y_hat + (c_val - s) / mu


def penalty_update(mu: Array, infeas: float, prev_infeas: float, k: int, opts: AlmOptions) -> Array:
    """Keep ``mu`` on sufficient decrease of ``||c - s||`` (or near
    feasibility); otherwise shrink all entries by ``kappa_mu``."""
    if k == 0 or infeas <= opts.theta * prev_infeas or infeas <= opts.eps_prim:
        return mu
    return opts.kappa_mu * mu


def initial_tolerance(opts: AlmOptions) -> float:
    return max(opts.eps_dual ** (1.0 / 3.0), opts.eps_dual)


def tolerance_update(eps_k: float, opts: AlmOptions) -> float:
    return max(opts.kappa_eps * eps_k, opts.eps_dual)


def init_primal(problem: Problem, x_raw: Array) -> Tuple[Array, Array]:
    """Move ``x_raw`` into ``dom g`` with a machine-epsilon prox step and
    pick the slack as a projection of ``c(x)`` onto ``D``."""
    x, _ = problem.g_prox(np.asarray(x_raw, dtype=float), EPS_MACHINE)
    x = check_array("g_prox", x)
    s = check_array("d_proj", problem.d_proj(check_array("c_eval", problem.c_eval(x))))
    return x, s


def init_penalty(problem: Problem, x_init: Array, bounds: Tuple[float, float] = (1e-8, 1e8)) -> Array:
    """Per-constraint initial penalties scaled by the initial violation and cost."""
    q = eval_q(problem, x_init)
    if not math.isfinite(q):
        raise ValueError("init_penalty requires x_init in dom q")
    cx = check_array("c_eval", problem.c_eval(x_init))
    delta = cx - problem.d_proj(cx)
    mu = 0.1 * np.maximum(1.0, 0.5 * delta**2) / max(1.0, q)
    return np.clip(mu, bounds[0], bounds[1])


def lift_subproblem(problem: Problem, mu: Array, y_hat: Array) -> CompositeProblem:
    """Augmented Lagrangian subproblem in ``z = (x, s)`` as a composite problem.

    The smooth part carries ``f`` and the quadratic penalty; the nonsmooth
    part is ``g(x) + indicator_D(s)``, whose prox splits into
    ``(prox_{gamma g}(x), proj_D(s))``.
    """
    n = problem.n
    mu = np.asarray(mu, dtype=float)
    shift = mu * y_hat
    const = 0.5 * float(np.sum(mu * y_hat**2))

    def weighted(z: Array) -> Tuple[Array, Array]:
        x = z[:n]
        cx = check_array("c_eval", problem.c_eval(x))
        return x, (cx + shift - z[n:]) / mu

    def phi_eval(z: Array) -> float:
        x, w = weighted(z)
        return check_scalar("f_eval", problem.f_eval(x)) + 0.5 * float(np.sum(mu * w * w)) - const

    def phi_grad(z: Array) -> Array:
        x, w = weighted(z)
        gx = check_array("f_grad", problem.f_grad(x)) + check_array("c_jtv", problem.c_jtv(x, w))
        return np.concatenate([gx, -w])

    def psi_prox(z: Array, gamma: float):
        x, gx = problem.g_prox(z[:n], gamma)
        x = check_array("g_prox", x)
        s = check_array("d_proj", problem.d_proj(z[n:]))
        return np.concatenate([x, s]), check_scalar("g_prox", gx)

    def psi_eval(z: Array) -> float:
        if problem.d_contains is not None and not problem.d_contains(z[n:], 0.0):
            return math.inf
        return check_scalar("g_eval", problem.g_eval(z[:n]))

    return CompositeProblem(phi_eval, phi_grad, psi_prox, psi_eval, problem.prox_bound)


def alm_solve(
    problem: Problem,
    x_raw: Array,
    y_init: Optional[Array] = None,
    opts: Optional[AlmOptions] = None,
    trace: Optional[Callable[[TraceRow], None]] = None,
    inner_callback=None,
) -> AlmReport:
    """Solve ``min f + g s.t. c(x) in D`` from the primal-dual guess ``(x_raw, y_init)``.

    Terminates with status ``solved`` once the inner tolerance has reached
    ``eps_dual`` (and the inner solve met it) while ``||c(x) - s|| <=
    eps_prim``. ``infeasible_suspect`` is reported when the penalties have
    collapsed below ``mu_floor`` and the violation stagnates for
    ``stall_window`` consecutive iterations.

    Raises
    ------
    OracleError
        If an oracle produces NaN.
    """
    opts = opts or AlmOptions()
    x, s = init_primal(problem, x_raw)
    if opts.mu0 is not None:
        mu = np.broadcast_to(np.asarray(opts.mu0, dtype=float), (problem.m,)).copy()
    else:
        mu = init_penalty(problem, x, opts.mu_bounds)
    y = np.zeros(problem.m) if y_init is None else np.array(y_init, dtype=float)
    clamp = opts.safeguard or safeguard
    state = AlmState(x=x, s=s, y=y, y_hat=clamp(y, opts.y_max), mu=mu, eps_k=initial_tolerance(opts))
    rows: List[TraceRow] = []
    stalled = 0
    primal = dual = math.inf

    def report(status: str, message: str = "") -> AlmReport:
        return AlmReport(
            status=status, x=state.x, s=state.s, y=state.y, primal=primal, dual=dual,
            q=eval_q(problem, state.x), outer_iterations=state.k,
            inner_iterations=state.inner_iterations, trace=rows, message=message,
        )

    for k in range(opts.max_outer):
        state.k = k
        state.y_hat = clamp(state.y, opts.y_max)
        sub = lift_subproblem(problem, state.mu, state.y_hat)
        inner = replace(opts.inner, eps=state.eps_k, gamma0=None)
        if opts.max_inner_total is not None:
            inner = replace(inner, max_iter=min(inner.max_iter, opts.max_inner_total - state.inner_iterations))
        try:
            zbar, res, ist = panoc_solve(sub, np.concatenate([state.x, state.s]), inner, inner_callback)
        except OracleError:
            raise
        except (NumericalError, FloatingPointError) as exc:
            state.k = k + 1
            return report("inner_failure", str(exc))
        state.inner_iterations += ist.iterations
        state.x, state.s = zbar[: problem.n], zbar[problem.n :]
        cx = check_array("c_eval", problem.c_eval(state.x))
        infeas = float(np.linalg.norm(cx - state.s))
        state.y = dual_update(state.y_hat, cx, state.s, state.mu)
        primal, dual = infeas, res
        row = TraceRow(k, infeas, state.eps_k, float(state.mu.min()), ist.iterations, res, eval_q(problem, state.x))
        rows.append(row)
        if trace is not None:
            trace(row)

        if state.eps_k <= opts.eps_dual and res <= opts.eps_dual and infeas <= opts.eps_prim:
            state.k = k + 1
            return report("solved")

        if opts.max_inner_total is not None and state.inner_iterations >= opts.max_inner_total:
            state.k = k + 1
            return report("max_outer", "inner iteration budget exhausted")

        if state.mu.min() < opts.mu_floor and infeas > opts.eps_prim and infeas >= opts.theta * state.prev_infeas:
            stalled += 1
            if stalled >= opts.stall_window:
                state.k = k + 1
                return report("infeasible_suspect", "penalty collapsed without progress in feasibility")
        else:
            stalled = 0

        state.mu = penalty_update(state.mu, infeas, state.prev_infeas, k, opts)
        state.prev_infeas = infeas
        state.eps_k = tolerance_update(state.eps_k, opts)

    state.k = opts.max_outer
    return report("max_outer")

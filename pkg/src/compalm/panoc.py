"""PANOC+ for unconstrained composite problems ``min phi(z) + psi(z)``.

``phi`` needs only a locally Lipschitz gradient: the proximal stepsize
``gamma`` is found by backtracking on a quadratic upper bound, and
accelerated (LBFGS) steps are safeguarded by a backtracking on the
forward-backward envelope (FBE). The two linesearches are entangled: a
``gamma`` reduction restarts the direction selection with a fresh LBFGS
memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .core import NumericalError
from .smallalg import LbfgsMemory

Array = np.ndarray

# Both linesearch tests compare values that agree to within roundoff once
# ||zbar - z|| is tiny; this relative slack keeps them from rejecting steps
# on floating-point noise alone.
ROUNDOFF = 10.0 * np.finfo(float).eps


def roundoff_margin(value: float) -> float:
    return ROUNDOFF * (1.0 + abs(value))


class StepsizeCollapse(NumericalError):
    """``gamma`` fell below ``gamma_min``; ``phi`` is likely not smooth or
    its gradient is inconsistent with its values."""


@dataclass(frozen=True)
class CompositeProblem:
    phi_eval: Callable[[Array], float]
    phi_grad: Callable[[Array], Array]
    psi_prox: Callable[[Array, float], Tuple[Array, float]]
    psi_eval: Callable[[Array], float]
    prox_bound: float = math.inf


@dataclass(frozen=True)
class PanocOptions:
    """Parameters of PANOC+.

    ``acceleration`` is ``"lbfgs"`` or ``"none"``; with ``"none"`` the
    direction is the forward-backward step and the method reduces to an
    adaptive proximal gradient scheme. Backtracking on ``tau`` stops at
    ``tau_min``, below which the pure forward-backward step (``tau = 0``) is
    taken.
    """

    alpha: float = 0.95
    beta: float = 0.5
    delta_cap: float = 1e3
    gamma0: Optional[float] = None
    eps: float = 1e-6
    max_iter: int = 100_000
    gamma_min: float = 1e-15
    acceleration: str = "lbfgs"
    memory: int = 5
    tau_min: float = 2.0**-20

    def __post_init__(self):
        if not 0 < self.alpha < 1 or not 0 < self.beta < 1:
            raise ValueError("alpha and beta must lie in (0, 1)")
        if not self.delta_cap > 0 or not self.eps > 0 or not self.gamma_min > 0:
            raise ValueError("delta_cap, eps and gamma_min must be positive")
        if self.gamma0 is not None and not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if self.max_iter < 1 or self.memory < 1:
            raise ValueError("max_iter and memory must be positive")
        if self.acceleration not in ("lbfgs", "none"):
            raise ValueError(f"unknown acceleration {self.acceleration!r}")


@dataclass
class PanocState:
    z: Array
    zbar: Array
    gamma: float
    tau: float = 1.0
    Phi: float = math.inf
    residual: float = math.inf
    lbfgs: Optional[LbfgsMemory] = None
    status: str = "running"
    iterations: int = 0
    phi_evals: int = 0
    grad_evals: int = 0
    prox_evals: int = 0
    gamma_halvings: int = 0
    tau_halvings: int = 0
    tau_fallbacks: int = 0


@dataclass(frozen=True)
class PanocIterate:
    """Trace record passed to the callback."""

    k: int
    gamma: float
    tau: float
    Phi: float
    residual: float
    z: Array = field(repr=False)
    zbar: Array = field(repr=False)
    final: bool = False


def forward_backward(problem: CompositeProblem, z: Array, gamma: float, grad: Optional[Array] = None):
    """One element of ``prox_{gamma psi}(z - gamma grad phi(z))`` and its psi value."""
    if grad is None:
        grad = problem.phi_grad(z)
    return problem.psi_prox(z - gamma * grad, gamma)


def fbe(problem: CompositeProblem, z: Array, zbar: Array, gamma: float, psi_zbar: float) -> float:
    """Forward-backward envelope at ``z`` given ``zbar`` from :func:`forward_backward`."""
    diff = zbar - z
    return float(
        problem.phi_eval(z) + problem.phi_grad(z) @ diff + psi_zbar + (diff @ diff) / (2.0 * gamma)
    )


def estimate_gamma0(problem: CompositeProblem, z0: Array, alpha: float = 0.95) -> float:
    """Initial stepsize ``0.95 * alpha / L`` from a finite-difference Lipschitz estimate."""
    z0 = np.asarray(z0, dtype=float)
    h = 1e-6 * max(1.0, float(np.linalg.norm(z0)))
    delta = np.full(z0.shape, h / math.sqrt(z0.size))
    lip = float(np.linalg.norm(problem.phi_grad(z0 + delta) - problem.phi_grad(z0))) / h
    gamma = 1.0 if lip <= 1e-12 else 0.95 * alpha / lip
    if math.isfinite(problem.prox_bound):
        gamma = min(gamma, 0.95 * problem.prox_bound)
    return gamma


class _Point:
    """A candidate ``z`` with its forward-backward data at a given gamma."""

    __slots__ = ("z", "phi", "grad", "zbar", "psi_bar", "phi_bar", "grad_bar", "diff", "gamma", "Phi", "residual")


def panoc_solve(
    problem: CompositeProblem,
    z0: Array,
    opts: Optional[PanocOptions] = None,
    callback: Optional[Callable[[PanocIterate], None]] = None,
):
    """Minimize ``phi + psi`` from ``z0`` with PANOC+.

    Returns
    -------
    zbar : array
        Last forward-backward point; ``opts.eps``-stationary when
        ``state.status == "converged"``.
    residual : float
        ``||(zbar - z)/gamma - grad phi(zbar) + grad phi(z)||``, the norm of
        an element of the subdifferential of ``phi + psi`` at ``zbar``.
    state : PanocState
        Final iterate, counters and ``status`` in
        ``{"converged", "max_iter"}``.

    Raises
    ------
    StepsizeCollapse
        If ``gamma`` drops below ``opts.gamma_min``.
    """
    opts = opts or PanocOptions()
    alpha, beta = opts.alpha, opts.beta
    z = np.array(z0, dtype=float)
    gamma = opts.gamma0 if opts.gamma0 is not None else estimate_gamma0(problem, z, alpha)
    if math.isfinite(problem.prox_bound):
        gamma = min(gamma, 0.95 * problem.prox_bound)
    mem = LbfgsMemory(opts.memory) if opts.acceleration == "lbfgs" else None
    st = PanocState(z=z, zbar=z, gamma=gamma, lbfgs=mem)

    def smooth(pt: _Point) -> None:
        pt.phi = float(problem.phi_eval(pt.z))
        pt.grad = problem.phi_grad(pt.z)
        st.phi_evals += 1
        st.grad_evals += 1

    def fb_step(pt: _Point, gamma: float) -> bool:
        # Stepsize test: quadratic upper bound of phi between z and zbar.
        pt.gamma = gamma
        pt.zbar, pt.psi_bar = problem.psi_prox(pt.z - gamma * pt.grad, gamma)
        st.prox_evals += 1
        pt.phi_bar = float(problem.phi_eval(pt.zbar))
        st.phi_evals += 1
        pt.diff = pt.zbar - pt.z
        lin = pt.phi + pt.grad @ pt.diff
        sq = pt.diff @ pt.diff
        return not pt.phi_bar > lin + alpha / (2.0 * gamma) * sq + roundoff_margin(pt.phi)

    def finish(pt: _Point) -> None:
        pt.Phi = float(pt.phi + pt.grad @ pt.diff + pt.psi_bar + (pt.diff @ pt.diff) / (2.0 * pt.gamma))
        pt.grad_bar = problem.phi_grad(pt.zbar)
        st.grad_evals += 1
        pt.residual = float(np.linalg.norm(pt.diff / pt.gamma - pt.grad_bar + pt.grad))

    def halve_gamma(g: float) -> float:
        g *= 0.5
        st.gamma_halvings += 1
        if g < opts.gamma_min:
            raise StepsizeCollapse(f"stepsize fell below {opts.gamma_min:g}")
        return g

    def emit(pt: _Point, k: int, tau: float, final: bool = False) -> None:
        st.z, st.zbar, st.gamma, st.tau = pt.z, pt.zbar, pt.gamma, tau
        st.Phi, st.residual, st.iterations = pt.Phi, pt.residual, k + 1
        if callback is not None:
            callback(PanocIterate(k, pt.gamma, tau, pt.Phi, pt.residual, pt.z, pt.zbar, final))

    # k = 0
    cur = _Point()
    cur.z = z
    smooth(cur)
    while not fb_step(cur, gamma):
        gamma = halve_gamma(gamma)
    finish(cur)
    if cur.residual <= opts.eps:
        st.status = "converged"
        emit(cur, 0, 1.0, final=True)
        return cur.zbar, cur.residual, st
    emit(cur, 0, 1.0)

    prev = cur
    for k in range(1, opts.max_iter):
        gamma = prev.gamma
        r_prev = prev.z - prev.zbar
        gamma_changed = False
        accepted = None
        while accepted is None:
            # Direction, bounded by delta_cap * ||zbar - z||
            if mem is None:
                d = None
            else:
                d = mem.direction(r_prev)
                dn, cap = np.linalg.norm(d), opts.delta_cap * np.linalg.norm(r_prev)
                if dn > cap:
                    d *= cap / dn
            tau = 1.0
            while True:
                # Candidate on the segment between the FB point and
                # the accelerated point
                cur = _Point()
                if d is None or tau == 0.0:
                    cur.z, cur.phi, cur.grad = prev.zbar, prev.phi_bar, prev.grad_bar
                else:
                    cur.z = (1.0 - tau) * prev.zbar + tau * (prev.z + d)
                    smooth(cur)
                    if not math.isfinite(cur.phi):
                        tau = _shrink_tau(st, tau, opts.tau_min)
                        continue
                if not fb_step(cur, gamma):
                    gamma = halve_gamma(gamma)
                    gamma_changed = True
                    if mem is not None:
                        mem.reset()
                    break
                finish(cur)
                if cur.residual <= opts.eps:
                    st.status = "converged"
                    emit(cur, k, tau, final=True)
                    return cur.zbar, cur.residual, st
                bound = prev.Phi - beta * (1.0 - alpha) / (2.0 * prev.gamma) * (prev.diff @ prev.diff)
                bound += roundoff_margin(prev.Phi)
                if cur.Phi > bound and tau > 0.0 and d is not None:
                    tau = _shrink_tau(st, tau, opts.tau_min)
                    continue
                if cur.Phi > bound:
                    # tau = 0 can only fail through roundoff
                    st.tau_fallbacks += 1
                accepted = cur
                break
        cur = accepted
        if mem is not None and not gamma_changed:
            mem.update(cur.z - prev.z, (cur.z - cur.zbar) - r_prev)
        emit(cur, k, tau)
        prev = cur

    st.status = "max_iter"
    return prev.zbar, prev.residual, st


def _shrink_tau(st: PanocState, tau: float, tau_min: float) -> float:
    st.tau_halvings += 1
    tau *= 0.5
    return 0.0 if tau < tau_min else tau

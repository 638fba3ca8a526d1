"""Sparse mean-variance portfolio selection.

    minimize  0.5 x^T Q x + alpha * reg(x)
    s.t.      mean^T x >= rho,  1^T x = 1,  0 <= x <= u

cast as ``c(x) = (mean^T x, 1^T x) in [rho, inf) x {1}`` with the bounds
folded into the nonsmooth term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import Problem
from ..prox import L0, L1, LpPower
from ..sets import Box, Product, Singleton
from .rng import SplitMix64

REGULARIZERS = ("l0", "l1", "lp")


@dataclass(frozen=True, eq=False)
class PortfolioInstance:
    Q: np.ndarray
    mean: np.ndarray
    rho: float
    u: np.ndarray
    alpha: float

    @property
    def n(self) -> int:
        return self.mean.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, PortfolioInstance):
            return NotImplemented
        return (
            np.array_equal(self.Q, other.Q)
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.u, other.u)
            and self.rho == other.rho
            and self.alpha == other.alpha
        )

    def objective(self, x: np.ndarray, reg: str = "l0", p: float = 0.5) -> float:
        """``0.5 x^T Q x + alpha * reg(x)`` ignoring constraints."""
        return 0.5 * float(x @ self.Q @ x) + self.alpha * _reg_value(reg, x, p)


def _reg_value(reg: str, x: np.ndarray, p: float) -> float:
    if reg == "l0":
        return float(np.count_nonzero(x))
    if reg == "l1":
        return float(np.abs(x).sum())
    return float((np.abs(x) ** p).sum())


def gen_portfolio(seed: int, n: int, alpha: float = 0.0) -> PortfolioInstance:
    """Random instance: ``Q = F^T F / n + 0.01 I`` with ``F`` a Gaussian
    ``ceil(n/2) x n`` matrix, means uniform on ``[0, 0.1]``, ``rho`` half
    the best mean and ``u = 0.3``."""
    if n < 2:
        raise ValueError("need at least two assets")
    rng = SplitMix64(seed)
    k = math.ceil(n / 2)
    F = rng.normal(k * n).reshape(k, n)
    Q = F.T @ F / n
    Q = 0.5 * (Q + Q.T) + 0.01 * np.eye(n)
    mean = 0.1 * rng.uniform(n)
    inst = PortfolioInstance(Q=Q, mean=mean, rho=0.5 * float(mean.max()), u=np.full(n, 0.3), alpha=float(alpha))
    if feasibility_probe(inst) is None:
        raise ValueError(f"generated portfolio instance (seed {seed}) is infeasible")
    return inst


def feasibility_probe(inst: PortfolioInstance) -> Optional[np.ndarray]:
    """Fill assets by decreasing mean up to their bounds until the budget
    is spent; returns the point if it meets the return target."""
    x = np.zeros(inst.n)
    left = 1.0
    for i in np.argsort(-inst.mean, kind="stable"):
        x[i] = min(inst.u[i], left)
        left -= x[i]
        if left <= 0:
            break
    if left > 1e-12 or inst.mean @ x < inst.rho:
        return None
    return x


def portfolio_problem(inst: PortfolioInstance, reg: str = "l0", alpha: Optional[float] = None, p: float = 0.5) -> Problem:
    """Problem for ``reg`` in ``{"l0", "l1", "lp"}`` with weight ``alpha``
    (default: the instance's)."""
    alpha = inst.alpha if alpha is None else alpha
    lo, hi = np.zeros(inst.n), inst.u
    if reg == "l0":
        g = L0(alpha, lo, hi)
    elif reg == "l1":
        g = L1(alpha, lo, hi)
    elif reg == "lp":
        g = LpPower(alpha, p, lo, hi)
    else:
        raise ValueError(f"unknown regularizer {reg!r}; expected one of {REGULARIZERS}")
    Q, mean = inst.Q, inst.mean
    dset = Product([Box([inst.rho], [np.inf]), Singleton([1.0])])
    return Problem(
        n=inst.n,
        m=2,
        f_eval=lambda x: 0.5 * float(x @ Q @ x),
        f_grad=lambda x: Q @ x,
        g_prox=g.prox,
        g_eval=g.value,
        c_eval=lambda x: np.array([mean @ x, x.sum()]),
        c_jtv=lambda x, v: v[0] * mean + v[1],
        d_proj=dset.project,
        d_contains=dset.contains,
        name=f"portfolio-{reg}",
    )

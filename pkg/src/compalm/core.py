"""Constrained composite problem abstraction.

A problem is

    minimize  f(x) + g(x)   subject to   c(x) in D

with ``f`` and ``c`` smooth, ``g`` proper and lower semicontinuous (possibly
extended-valued) and ``D`` a closed set. Solvers only touch the problem
through the oracles bundled in :class:`Problem`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

Array = np.ndarray


class OracleError(FloatingPointError):
    """An oracle returned NaN. ``oracle`` names the offending callable."""

    def __init__(self, oracle: str, message: str = "returned NaN"):
        self.oracle = oracle
        super().__init__(f"oracle {oracle!r} {message}")


class NumericalError(ArithmeticError):
    """An internal iterative routine failed to converge."""


@dataclass(frozen=True)
class Problem:
    """Oracle bundle for ``min f(x) + g(x) s.t. c(x) in D``.

    Attributes
    ----------
    n, m : int
        Number of decision variables and constraints.
    f_eval, f_grad : callable
        Smooth cost value and gradient.
    g_prox : callable
        ``g_prox(x, gamma) -> (z, g(z))`` returns one element of
        ``prox_{gamma g}(x)`` together with its ``g`` value.
    g_eval : callable
        Nonsmooth cost; may return ``inf``.
    c_eval : callable
        Constraint map ``R^n -> R^m``.
    c_jtv : callable
        ``c_jtv(x, v)`` returns the product ``grad c(x)^T v``.
    d_proj : callable
        Returns one projection of a point of ``R^m`` onto ``D``.
    prox_bound : float
        Prox-boundedness threshold of ``g``; ``g_prox`` is valid for
        ``0 < gamma < prox_bound``.
    d_contains : callable, optional
        Membership predicate ``d_contains(v, tol) -> bool`` for ``D``.
    name : str
    """

    n: int
    m: int
    f_eval: Callable[[Array], float]
    f_grad: Callable[[Array], Array]
    g_prox: Callable[[Array, float], Tuple[Array, float]]
    g_eval: Callable[[Array], float]
    c_eval: Callable[[Array], Array]
    c_jtv: Callable[[Array, Array], Array]
    d_proj: Callable[[Array], Array]
    prox_bound: float = math.inf
    d_contains: Optional[Callable[..., bool]] = None
    name: str = field(default="problem")

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("problem dimensions must be positive")
        if not self.prox_bound > 0:
            raise ValueError("prox_bound must be positive")


def check_scalar(oracle: str, value: float) -> float:
    value = float(value)
    if math.isnan(value):
        raise OracleError(oracle)
    return value


def check_array(oracle: str, value: Array) -> Array:
    value = np.asarray(value, dtype=float)
    if np.isnan(value).any():
        raise OracleError(oracle)
    return value


def eval_q(problem: Problem, x: Array) -> float:
    """Total cost ``f(x) + g(x)``; ``inf`` exactly when ``g(x)`` is."""
    gx = check_scalar("g_eval", problem.g_eval(x))
    if gx == math.inf:
        return math.inf
    return check_scalar("f_eval", problem.f_eval(x)) + gx


def primal_infeasibility(problem: Problem, x: Array, s: Array) -> float:
    """Euclidean norm of ``c(x) - s``."""
    cx = check_array("c_eval", problem.c_eval(x))
    return float(np.linalg.norm(cx - s))

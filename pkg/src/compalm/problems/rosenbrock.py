"""Nonsmooth Rosenbrock function under an either-or constraint.

    minimize  10 (x2 + 1 - (x1 + 1)^2)^2 + |x1|
    s.t.      x2 <= -x1  or  x2 >= x1

The unique global minimizer is the origin.
"""

import numpy as np

from ..core import Problem
from ..prox import L1, Masked
from ..sets import EitherOr

_J = np.array([[-1.0, -1.0], [-1.0, 1.0]])


def _f(x):
    r = x[1] + 1.0 - (x[0] + 1.0) ** 2
    return 10.0 * r * r


def _grad(x):
    r = x[1] + 1.0 - (x[0] + 1.0) ** 2
    return np.array([-40.0 * r * (x[0] + 1.0), 20.0 * r])


def rosenbrock_problem() -> Problem:
    reg = Masked(L1(1.0), slice(0, 1))
    dset = EitherOr()
    return Problem(
        n=2,
        m=2,
        f_eval=_f,
        f_grad=_grad,
        g_prox=reg.prox,
        g_eval=reg.value,
        c_eval=lambda x: _J @ x,
        c_jtv=lambda x, v: _J.T @ v,
        d_proj=dset.project,
        d_contains=dset.contains,
        name="rosenbrock",
    )

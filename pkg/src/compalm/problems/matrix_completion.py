"""Low-rank Gram matrix recovery from partially observed squared distances.

The unknown ``B`` (ideally ``X X^T``) is an ``N x N`` matrix flattened row
major into ``x`` with ``B[i, j] = x[i*N + j]``. Constraints, stacked in this
order:

* observations, in sampling order: ``B_ii + B_jj - B_ij - B_ji - Delta_ij``;
* symmetry, row major over ``j < i``: ``B_ij - B_ji``;

all required to vanish (``D = {0}``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Problem
from ..prox import Spectral
from ..sets import Zeros
from .rng import SplitMix64, derive_seed

_START_LABEL = 0xB0


@dataclass(frozen=True, eq=False)
class MatrixCompletionInstance:
    N: int
    ell: int
    omega: np.ndarray  # (m_o, 2) pairs (i, j) with i > j
    delta: np.ndarray
    seed: int
    X: np.ndarray

    @property
    def m_s(self) -> int:
        return self.N * (self.N - 1) // 2

    @property
    def m_o(self) -> int:
        return len(self.omega)


def n_observations(N: int) -> int:
    return (N * N - N * (N - 1) // 2) // 3


def gen_matrix_completion(seed: int, N: int, ell: int) -> MatrixCompletionInstance:
    """Gaussian points ``X`` (``N x ell``) and ``n_observations(N)`` distinct
    unordered pairs drawn uniformly without replacement."""
    if N < 2 or ell < 1:
        raise ValueError("need N >= 2 and ell >= 1")
    rng = SplitMix64(seed)
    X = rng.normal(N * ell).reshape(N, ell)
    pairs = [(i, j) for i in range(N) for j in range(i)]
    m_o = n_observations(N)
    for t in range(m_o):
        r = t + rng.index(len(pairs) - t)
        pairs[t], pairs[r] = pairs[r], pairs[t]
    omega = np.array(pairs[:m_o], dtype=int).reshape(-1, 2)
    delta = np.sum((X[omega[:, 0]] - X[omega[:, 1]]) ** 2, axis=1)
    return MatrixCompletionInstance(N=N, ell=ell, omega=omega, delta=delta, seed=seed, X=X)


def random_start(seed: int, N: int) -> np.ndarray:
    """Standard normal initial guess for ``B``, flattened."""
    return SplitMix64(derive_seed(seed, _START_LABEL)).normal(N * N)


def constraint_pattern(inst: MatrixCompletionInstance):
    """Sparse ``(rows, cols, vals)`` of the constant constraint Jacobian and
    the right-hand side."""
    N = inst.N
    i, j = inst.omega[:, 0], inst.omega[:, 1]
    ro = np.arange(inst.m_o)
    rows = [ro, ro, ro, ro]
    cols = [i * N + i, j * N + j, i * N + j, j * N + i]
    vals = [np.ones(inst.m_o), np.ones(inst.m_o), -np.ones(inst.m_o), -np.ones(inst.m_o)]
    si, sj = np.array([(a, b) for a in range(N) for b in range(a)], dtype=int).reshape(-1, 2).T
    rs = inst.m_o + np.arange(inst.m_s)
    rows += [rs, rs]
    cols += [si * N + sj, sj * N + si]
    vals += [np.ones(inst.m_s), -np.ones(inst.m_s)]
    rhs = np.concatenate([inst.delta, np.zeros(inst.m_s)])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), rhs


def matrix_completion_problem(inst: MatrixCompletionInstance, reg: str = "nuclear", p: float = 0.5) -> Problem:
    """``f = 0``, ``g`` the spectral regularizer ``reg`` in
    ``{"rank", "nuclear", "schatten"}``."""
    N = inst.N
    n, m = N * N, inst.m_o + inst.m_s
    rows, cols, vals, rhs = constraint_pattern(inst)
    g = Spectral((N, N), reg, 1.0, p)
    dset = Zeros(m)

    def c_eval(x):
        return np.bincount(rows, weights=vals * x[cols], minlength=m) - rhs

    def c_jtv(x, v):
        return np.bincount(cols, weights=vals * v[rows], minlength=n)

    return Problem(
        n=n,
        m=m,
        f_eval=lambda x: 0.0,
        f_grad=lambda x: np.zeros(n),
        g_prox=g.prox,
        g_eval=g.value,
        c_eval=c_eval,
        c_jtv=c_jtv,
        d_proj=dset.project,
        d_contains=dset.contains,
        name=f"matrix-{reg}",
    )

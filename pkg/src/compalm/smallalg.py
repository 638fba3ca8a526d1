"""Small dense linear algebra: one-sided Jacobi SVD and LBFGS memory."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numba
import numpy as np

from .core import NumericalError

Array = np.ndarray

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``A = U diag(sigma) V^T`` with ``sigma`` nonincreasing."""

    U: Array
    sigma: Array
    V: Array

    def reconstruct(self) -> Array:
        return (self.U * self.sigma) @ self.V.T


@lru_cache(maxsize=64)
def _pair_schedule(m: int) -> Tuple[Array, Array]:
    """Circle-method tournament on ``m`` columns.

    Row ``r`` of the returned ``(P, Q)`` lists the pairs ``(P[r, i], Q[r,
    i])`` of round ``r`` (padded with -1). Every column pair meets exactly
    once per sweep and the pairs of one round are disjoint.
    """
    k = m + (m % 2)
    players = list(range(k))
    P = np.full((max(k - 1, 1), max(k // 2, 1)), -1, dtype=np.int64)
    Q = P.copy()
    for r in range(k - 1):
        slot = 0
        for i in range(k // 2):
            a, b = players[i], players[k - 1 - i]
            if a < m and b < m:
                P[r, slot], Q[r, slot] = min(a, b), max(a, b)
                slot += 1
        players = [players[0], players[-1]] + players[1:-1]
    P.flags.writeable = Q.flags.writeable = False
    return P, Q


@numba.njit(cache=True)
def _jacobi_sweeps(W, V, P, Q, tol, max_sweeps):  # pragma: no cover - compiled
    # Hestenes rotations in round-robin order; returns False if the sweep
    # limit is reached while pairs are still being rotated.
    rows, cols = W.shape
    for _ in range(max_sweeps):
        rotated = False
        for r in range(P.shape[0]):
            for i in range(P.shape[1]):
                p, q = P[r, i], Q[r, i]
                if p < 0:
                    continue
                alpha = 0.0
                beta = 0.0
                gam = 0.0
                for t in range(rows):
                    alpha += W[t, p] * W[t, p]
                    beta += W[t, q] * W[t, q]
                    gam += W[t, p] * W[t, q]
                if abs(gam) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gam)
                sign = 1.0 if zeta >= 0 else -1.0
                tn = sign / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, tn)
                s = c * tn
                for t in range(rows):
                    wp, wq = W[t, p], W[t, q]
                    W[t, p] = c * wp - s * wq
                    W[t, q] = s * wp + c * wq
                for t in range(cols):
                    vp, vq = V[t, p], V[t, q]
                    V[t, p] = c * vp - s * vq
                    V[t, q] = s * vp + c * vq
        if not rotated:
            return True
    return False


def _complete_basis(U: Array, good: Array) -> Array:
    """Replace the columns of ``U`` not flagged ``good`` by an orthonormal
    completion of the good ones (Gram-Schmidt on unit vectors)."""
    U = U.copy()
    rows = U.shape[0]
    basis = [U[:, j] for j in np.flatnonzero(good)]
    candidates = iter(range(rows))
    for j in np.flatnonzero(~good):
        for i in candidates:
            v = np.zeros(rows)
            v[i] = 1.0
            for _ in range(2):
                for b in basis:
                    v -= (b @ v) * b
            nv = np.linalg.norm(v)
            if nv > 0.5:
                U[:, j] = v / nv
                basis.append(U[:, j])
                break
        else:
            raise NumericalError("cannot complete orthonormal basis")
    return U


def svd_dense(A: Array, tol: float = 1e-14, max_sweeps: int = 30) -> SvdResult:
    """Thin SVD of a small dense matrix by one-sided (Hestenes) Jacobi.

    Columns are orthogonalized pairwise until every pair satisfies
    ``|<a_p, a_q>| <= tol * ||a_p|| ||a_q||``. Wide matrices are handled
    through their transpose.

    Parameters
    ----------
    A : (N, M) array
    tol : float
        Relative off-diagonal tolerance of the column Gram matrix.
    max_sweeps : int
        Number of full sweeps before giving up.

    Returns
    -------
    SvdResult
        ``U`` is ``N x r``, ``V`` is ``M x r`` with ``r = min(N, M)``.

    Raises
    ------
    NumericalError
        If the sweeps do not converge.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("svd_dense expects a 2-D array")
    if not np.isfinite(A).all():
        raise NumericalError("svd_dense: non-finite entries")
    transposed = A.shape[0] < A.shape[1]
    W = A.T.copy() if transposed else A.copy()
    cols = W.shape[1]
    V = np.eye(cols)

    P, Q = _pair_schedule(cols)
    if cols >= 2 and not _jacobi_sweeps(W, V, P, Q, tol, max_sweeps):
        raise NumericalError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, W, V = sigma[order], W[:, order], V[:, order]
    good = sigma > (sigma[0] if sigma.size else 0.0) * 1e-150
    good &= sigma > 0
    sigma = np.where(good, sigma, 0.0)
    U = np.zeros_like(W)
    U[:, good] = W[:, good] / sigma[good]
    if not good.all():
        U = _complete_basis(U, good)
    if transposed:
        return SvdResult(U=V, sigma=sigma, V=U)
    return SvdResult(U=U, sigma=sigma, V=V)


def numerical_rank(sigma: Array, dims: Tuple[int, int]) -> int:
    """Count singular values above ``max(N, M) * eps * sigma_max``."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0:
        return 0
    return int(np.count_nonzero(sigma > max(dims) * EPS * sigma[0]))


class LbfgsMemory:
    """Ring buffer of ``(dz, dr)`` pairs for the LBFGS two-loop recursion.

    Pairs failing ``<dz, dr> > curvature_eps * ||dz|| * ||dr||`` are skipped.
    """

    def __init__(self, capacity: int = 5, curvature_eps: float = 1e-12):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.curvature_eps = curvature_eps
        self._pairs: deque = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._pairs)

    @property
    def pairs(self):
        return [(dz, dr) for dz, dr, _ in self._pairs]

    def update(self, dz: Array, dr: Array) -> bool:
        """Append a pair; returns whether it was accepted."""
        dzdr = float(dz @ dr)
        if not dzdr > self.curvature_eps * np.linalg.norm(dz) * np.linalg.norm(dr):
            return False
        self._pairs.append((np.array(dz, dtype=float), np.array(dr, dtype=float), 1.0 / dzdr))
        return True

    def reset(self) -> None:
        self._pairs.clear()

    def direction(self, r: Array) -> Array:
        """Return ``-H r`` with ``H`` the implicit inverse approximation."""
        q = np.array(r, dtype=float)
        if not self._pairs:
            return -q
        alphas = []
        for dz, dr, rho in reversed(self._pairs):
            a = rho * (dz @ q)
            q -= a * dr
            alphas.append(a)
        dz, dr, rho = self._pairs[-1]
        q *= 1.0 / (rho * (dr @ dr))
        for (dz, dr, rho), a in zip(self._pairs, reversed(alphas)):
            b = rho * (dr @ q)
            q += (a - b) * dz
        return -q


def lbfgs_direction(mem: LbfgsMemory, r: Array) -> Array:
    return mem.direction(r)


def lbfgs_update(mem: LbfgsMemory, dz: Array, dr: Array) -> LbfgsMemory:
    mem.update(dz, dr)
    return mem


def lbfgs_reset(mem: LbfgsMemory) -> LbfgsMemory:
    mem.reset()
    return mem

"""Proximal operators for sparsity and low-rank regularizers.

Every operator returns one deterministic element of the (possibly
set-valued) proximal map. Ties between candidates are resolved toward the
sparser point, i.e. toward zero.

Scalar rules act componentwise on arrays. The classes at the bottom bundle a
rule with its value so that it can be plugged into a problem as
``g_prox(x, gamma) -> (z, g(z))``.
"""

from __future__ import annotations

import math
from typing import Callable, Tuple

import numpy as np

from .core import NumericalError
from .smallalg import numerical_rank, svd_dense

Array = np.ndarray


def prox_l1(x: Array, gamma: float) -> Array:
    """Soft threshold: minimizer of ``gamma*||z||_1 + 0.5*||z - x||^2``."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)


def prox_l0(x: Array, gamma: float, sigma: float = 1.0) -> Array:
    """Hard threshold at ``sqrt(2*gamma*sigma)``; exact ties map to zero."""
    x = np.asarray(x, dtype=float)
    # Compare costs rather than |x| against a rounded square root, so the
    # tie rule is exact.
    keep = 0.5 * x * x > gamma * sigma
    return np.where(keep, x, 0.0)


def _check_box(lo: Array, hi: Array) -> None:
    if np.any(lo > 0) or np.any(hi < 0):
        raise ValueError("box must contain zero in every coordinate")


def prox_l0_box(x: Array, gamma: float, alpha: float, lo, hi) -> Array:
    """Exact prox of ``alpha*||z||_0 + indicator_[lo, hi](z)``.

    Compares the candidates ``z = 0`` and ``z = clip(x, lo, hi)`` per
    coordinate. Requires ``lo <= 0 <= hi``.
    """
    x = np.asarray(x, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), x.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), x.shape)
    _check_box(lo, hi)
    z = np.clip(x, lo, hi)
    cost_zero = x * x / (2.0 * gamma)
    cost_clip = alpha * (z != 0) + (z - x) ** 2 / (2.0 * gamma)
    return np.where(cost_clip < cost_zero, z, 0.0)


def _lp_root(a: Array, gamma: float, p: float, maxiter: int = 100) -> Array:
    # Largest root of h(z) = z + gamma*p*z**(p-1) - a on z >= z*, where z* is
    # the minimizer of the convex map h. Newton from the right end of the
    # bracket [z*, a] decreases monotonically; bisection guards roundoff.
    lo = np.full_like(a, (gamma * p * (1.0 - p)) ** (1.0 / (2.0 - p)))
    hi = a.copy()
    z = a.copy()
    for _ in range(maxiter):
        h = z + gamma * p * z ** (p - 1.0) - a
        dh = 1.0 + gamma * p * (p - 1.0) * z ** (p - 2.0)
        lo = np.where(h < 0, z, lo)
        hi = np.where(h > 0, z, hi)
        step = h / dh
        znew = z - step
        bad = ~((znew > lo) & (znew < hi)) | ~np.isfinite(znew)
        znew = np.where(bad, 0.5 * (lo + hi), znew)
        done = (np.abs(znew - z) <= 4 * np.finfo(float).eps * znew) | (h == 0)
        z = znew
        if done.all():
            return z
    raise NumericalError("prox_lp_p: root finder did not converge in 100 iterations")


def prox_lp_p(x: Array, gamma: float, p: float) -> Array:
    """Minimizer of ``gamma*sum|z_i|^p + 0.5*||z - x||^2`` for ``0 < p < 1``.

    Per coordinate the nonzero stationary point (if any) is found by
    safeguarded Newton and compared against zero.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    out = np.zeros_like(a)
    zstar = (gamma * p * (1.0 - p)) ** (1.0 / (2.0 - p))
    with np.errstate(divide="ignore"):
        hmin = zstar + gamma * p * zstar ** (p - 1.0) - a
    cand = (hmin <= 0) & (a > 0)
    if cand.any():
        ac = a[cand]
        root = _lp_root(ac, gamma, p)
        keep = gamma * root**p + 0.5 * (root - ac) ** 2 < 0.5 * ac * ac
        out[cand] = np.where(keep, root, 0.0)
    return np.sign(x) * out


def prox_lp_p_box(x: Array, gamma: float, weight: float, p: float, lo, hi) -> Array:
    """Exact prox of ``weight*sum|z_i|^p + indicator_[lo, hi]`` with ``lo <= 0 <= hi``.

    On each side of the origin the scalar objective has at most one interior
    local minimizer, so the global one over the box is zero, the clipped
    unconstrained minimizer, or nothing better than zero.
    """
    x = np.asarray(x, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), x.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), x.shape)
    _check_box(lo, hi)
    z = np.clip(prox_lp_p(x, gamma * weight, p), lo, hi)
    cost = gamma * weight * np.abs(z) ** p + 0.5 * (z - x) ** 2
    return np.where(cost < 0.5 * x * x, z, 0.0)


def prox_l1_box(x: Array, gamma: float, weight: float, lo, hi) -> Array:
    """Prox of ``weight*||z||_1 + indicator_[lo, hi]`` with ``lo <= 0 <= hi``."""
    x = np.asarray(x, dtype=float)
    return np.clip(prox_l1(x, gamma * weight), lo, hi)


def spectral_prox(A: Array, scalar_rule: Callable[[Array, float], Array], gamma: float) -> Array:
    """Apply a scalar prox to the singular values of ``A``.

    Valid for unitarily invariant regularizers whose scalar rule maps
    nonnegative values to nonnegative values (rank, nuclear norm, Schatten).
    """
    return spectral_prox_svd(A, scalar_rule, gamma)[0]


def spectral_prox_svd(A, scalar_rule, gamma) -> Tuple[Array, Array]:
    """As :func:`spectral_prox`, also returning the new singular values."""
    res = svd_dense(A)
    s = scalar_rule(res.sigma, gamma)
    return (res.U * s) @ res.V.T, s


# -- regularizer objects ----------------------------------------------------


class L1:
    """``weight * ||x||_1`` optionally restricted to a box containing 0."""

    def __init__(self, weight: float = 1.0, lo=None, hi=None):
        self.weight, self.lo, self.hi = weight, lo, hi

    def value(self, x: Array) -> float:
        if self.lo is not None and (np.any(x < self.lo) or np.any(x > self.hi)):
            return math.inf
        return self.weight * float(np.abs(x).sum())

    def prox(self, x: Array, gamma: float) -> Tuple[Array, float]:
        if self.lo is None:
            z = prox_l1(x, gamma * self.weight)
        else:
            z = prox_l1_box(x, gamma, self.weight, self.lo, self.hi)
        return z, self.weight * float(np.abs(z).sum())


class L0:
    """``weight * ||x||_0`` optionally restricted to a box containing 0."""

    def __init__(self, weight: float = 1.0, lo=None, hi=None):
        self.weight, self.lo, self.hi = weight, lo, hi

    def value(self, x: Array) -> float:
        if self.lo is not None and (np.any(x < self.lo) or np.any(x > self.hi)):
            return math.inf
        return self.weight * float(np.count_nonzero(x))

    def prox(self, x: Array, gamma: float) -> Tuple[Array, float]:
        if self.lo is None:
            z = prox_l0(x, gamma, self.weight)
        else:
            z = prox_l0_box(x, gamma, self.weight, self.lo, self.hi)
        return z, self.weight * float(np.count_nonzero(z))


class LpPower:
    """``weight * sum |x_i|^p`` for ``0 < p < 1``, optionally boxed."""

    def __init__(self, weight: float = 1.0, p: float = 0.5, lo=None, hi=None):
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        self.weight, self.p, self.lo, self.hi = weight, p, lo, hi

    def value(self, x: Array) -> float:
        if self.lo is not None and (np.any(x < self.lo) or np.any(x > self.hi)):
            return math.inf
        return self.weight * float((np.abs(x) ** self.p).sum())

    def prox(self, x: Array, gamma: float) -> Tuple[Array, float]:
        if self.lo is None:
            z = prox_lp_p(x, gamma * self.weight, self.p)
        else:
            z = prox_lp_p_box(x, gamma, self.weight, self.p, self.lo, self.hi)
        return z, self.weight * float((np.abs(z) ** self.p).sum())


class Masked:
    """Apply a regularizer to the coordinates selected by ``index`` only."""

    def __init__(self, reg, index):
        self.reg = reg
        self.index = index

    def value(self, x: Array) -> float:
        return self.reg.value(x[self.index])

    def prox(self, x: Array, gamma: float) -> Tuple[Array, float]:
        z = np.array(x, dtype=float)
        z[self.index], val = self.reg.prox(x[self.index], gamma)
        return z, val


class Spectral:
    """Unitarily invariant matrix regularizer acting on flattened ``rows x cols``.

    ``kind`` is ``"rank"``, ``"nuclear"`` or ``"schatten"`` (``sum sigma^p``).
    """

    def __init__(self, shape: Tuple[int, int], kind: str, weight: float = 1.0, p: float = 0.5):
        if kind not in ("rank", "nuclear", "schatten"):
            raise ValueError(f"unknown spectral regularizer {kind!r}")
        self.shape, self.kind, self.weight, self.p = tuple(shape), kind, weight, p
        if kind == "rank":
            self._rule = lambda s, g: prox_l0(s, g, weight)
        elif kind == "nuclear":
            self._rule = lambda s, g: prox_l1(s, g * weight)
        else:
            self._rule = lambda s, g: prox_lp_p(s, g * weight, p)

    def value_from_sigma(self, sigma: Array) -> float:
        if self.kind == "rank":
            return self.weight * numerical_rank(sigma, self.shape)
        if self.kind == "nuclear":
            return self.weight * float(sigma.sum())
        return self.weight * float((sigma**self.p).sum())

    def value(self, x: Array) -> float:
        return self.value_from_sigma(svd_dense(np.reshape(x, self.shape)).sigma)

    def prox(self, x: Array, gamma: float) -> Tuple[Array, float]:
        Z, s = spectral_prox_svd(np.reshape(x, self.shape), self._rule, gamma)
        # Reuse the thresholded spectrum instead of a second SVD.
        return Z.ravel(), self.value_from_sigma(np.sort(s)[::-1])

"""Projections onto closed (possibly nonconvex) constraint sets.

Each set exposes ``dim``, ``project(v)`` and ``contains(v, tol)``. When the
projection is not unique the first (lowest-index) candidate wins.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

Array = np.ndarray


class Box:
    """Componentwise interval ``[lo, hi]``; infinite bounds allowed."""

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape:
            raise ValueError("bound shapes differ")
        if np.any(self.lo > self.hi):
            raise ValueError("empty box: lo > hi")
        self.dim = self.lo.size

    def project(self, v: Array) -> Array:
        return np.clip(v, self.lo, self.hi)

    def contains(self, v: Array, tol: float = 0.0) -> bool:
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))


def Singleton(point) -> Box:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    return Box(point, point)


def Zeros(dim: int) -> Box:
    return Singleton(np.zeros(dim))


def proj_box(v: Array, lo, hi) -> Array:
    return np.clip(np.asarray(v, dtype=float), lo, hi)


class IntervalUnion:
    """Union of sorted, disjoint closed intervals on the real line."""

    dim = 1

    def __init__(self, intervals: Sequence[Sequence[float]]):
        iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
        if iv.shape[0] == 0:
            raise ValueError("need at least one interval")
        if np.any(iv[:, 0] > iv[:, 1]) or np.any(iv[1:, 0] <= iv[:-1, 1]):
            raise ValueError("intervals must be nonempty, sorted and disjoint")
        self.intervals = iv

    def project(self, v: Array) -> Array:
        v = float(np.asarray(v).reshape(-1)[0])
        cands = np.clip(v, self.intervals[:, 0], self.intervals[:, 1])
        # argmin returns the first minimizer: ties go to the lower interval.
        return np.array([cands[np.argmin(np.abs(cands - v))]])

    def contains(self, v: Array, tol: float = 0.0) -> bool:
        v = float(np.asarray(v).reshape(-1)[0])
        return bool(np.any((v >= self.intervals[:, 0] - tol) & (v <= self.intervals[:, 1] + tol)))


def proj_interval_union(v: float, intervals) -> float:
    return float(IntervalUnion(intervals).project(np.array([v]))[0])


class Union:
    """Finite union of sets of equal dimension: project onto each piece and
    keep the nearest, earliest piece on ties."""

    def __init__(self, pieces):
        pieces = list(pieces)
        if not pieces or len({p.dim for p in pieces}) != 1:
            raise ValueError("pieces must be nonempty with equal dimension")
        self.pieces = pieces
        self.dim = pieces[0].dim

    def project(self, v: Array) -> Array:
        best, best_d = None, math.inf
        for piece in self.pieces:
            p = piece.project(v)
            d = float(np.sum((p - v) ** 2))
            if d < best_d:
                best, best_d = p, d
        return best

    def contains(self, v: Array, tol: float = 0.0) -> bool:
        return any(p.contains(v, tol) for p in self.pieces)


class EitherOr(Union):
    """``{(a, b) : a >= 0 or b >= 0}``."""

    def __init__(self):
        super().__init__([Box([0.0, -np.inf], [np.inf, np.inf]), Box([-np.inf, 0.0], [np.inf, np.inf])])

    def project(self, v: Array) -> Array:
        v = np.asarray(v, dtype=float)
        if max(v[0], v[1]) >= 0:
            return v.copy()
        if abs(v[0]) <= abs(v[1]):
            return np.array([0.0, v[1]])
        return np.array([v[0], 0.0])


def proj_either_or(v: Array) -> Array:
    return EitherOr().project(v)


class Product:
    """Cartesian product; blocks are consecutive slices of the vector."""

    def __init__(self, factors):
        self.factors = list(factors)
        self.dim = sum(f.dim for f in self.factors)
        self._offsets = np.cumsum([0] + [f.dim for f in self.factors])

    def _blocks(self, v: Array):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {v.shape}")
        for f, a, b in zip(self.factors, self._offsets[:-1], self._offsets[1:]):
            yield f, v[a:b]

    def project(self, v: Array) -> Array:
        return np.concatenate([f.project(block) for f, block in self._blocks(v)])

    def contains(self, v: Array, tol: float = 0.0) -> bool:
        return all(f.contains(block, tol) for f, block in self._blocks(v))


def proj_product(v: Array, factors) -> Array:
    return Product(factors).project(v)

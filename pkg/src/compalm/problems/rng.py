"""SplitMix64 stream used by all instance generators.

The generator is fully specified here so that instances can be reproduced
from the seed alone, independently of numpy's bit generators:

* state advances by ``0x9E3779B97F4A7C15`` (mod 2**64) per draw, starting
  from the seed; the ``i``-th output (``i >= 1``) mixes ``seed + i*golden``::

      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      z =  z ^ (z >> 31)

* ``uniform``: ``(u64 >> 11) * 2**-53`` in ``[0, 1)``;
* ``normal``: Box-Muller on consecutive pairs ``(u1, u2)`` with
  ``u1 <- 1 - uniform``; each pair yields ``r cos(2 pi u2)`` then
  ``r sin(2 pi u2)``;
* ``index(bound)``: ``floor(uniform * bound)``.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, label: int) -> int:
    """Independent child seed for a labelled sub-stream."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) ^ _mix(np.array([label % 2**64], dtype=np.uint64) + GOLDEN)[0]
        return int(_mix(np.array([z], dtype=np.uint64))[0])


class SplitMix64:
    def __init__(self, seed: int):
        self.state = np.uint64(int(seed) % 2**64)

    def next_u64(self, size: int) -> np.ndarray:
        steps = np.arange(1, size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = self.state + steps * GOLDEN
            self.state = self.state + np.uint64(size) * GOLDEN
            return _mix(z)

    def uniform(self, size: int) -> np.ndarray:
        return (self.next_u64(size) >> np.uint64(11)).astype(float) * 2.0**-53

    def normal(self, size: int) -> np.ndarray:
        npairs = (size + 1) // 2
        u = self.uniform(2 * npairs).reshape(npairs, 2)
        r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        t = 2.0 * np.pi * u[:, 1]
        return np.column_stack([r * np.cos(t), r * np.sin(t)]).ravel()[:size]

    def index(self, bound: int) -> int:
        return int(self.uniform(1)[0] * bound)

"""Seedable 64-bit generator with fully specified output, for reproducible runs
across languages.

* ``splitmix64`` expands a 64-bit seed into the generator state.
* ``xoshiro256**`` produces the 64-bit stream.
* Uniforms use the top 53 bits, ``u = (x >> 11) * 2**-53`` in ``[0, 1)``.
* Gaussians come from the Marsaglia polar method: draw ``a = 2u1 - 1`` and
  ``b = 2u2 - 1`` until ``0 < s = a^2 + b^2 < 1``, then emit
  ``a*f`` followed by ``b*f`` with ``f = sqrt(-2 ln(s) / s)``.

Test vectors: ``splitmix64`` seeded with 0 yields ``0xE220A8397B1DCDAF`` first;
``xoshiro256**`` started from state ``[1, 2, 3, 4]`` yields ``11520, 0,
1509978240, 1215971899390074240``.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** with the polar-method Gaussian sampler on top."""

    def __init__(self, seed: int | None = None, state: tuple[int, int, int, int] | None = None) -> None:
        if state is None:
            if seed is None:
                raise ValueError("give a seed or an explicit state")
            sm = SplitMix64(seed)
            state = (sm.next(), sm.next(), sm.next(), sm.next())
        if not any(state):
            raise ValueError("xoshiro state must not be all zero")
        self.s = [x & MASK64 for x in state]
        self._spare: float | None = None

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def normal(self) -> float:
        if self._spare is not None:
            value, self._spare = self._spare, None
            return value
        while True:
            a = 2.0 * self.uniform() - 1.0
            b = 2.0 * self.uniform() - 1.0
            s = a * a + b * b
            if 0.0 < s < 1.0:
                f = math.sqrt(-2.0 * math.log(s) / s)
                self._spare = b * f
                return a * f

    def normals(self, count: int) -> np.ndarray:
        return np.fromiter((self.normal() for _ in range(count)), dtype=np.float64, count=count)

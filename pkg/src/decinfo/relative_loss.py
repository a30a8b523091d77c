"""Exact relative information loss of a decimator with a piecewise-constant filter.

The band ``[0, pi]`` is cut into ``L*M`` sub-bands of width ``pi/(L*M)``;
sub-band ``i`` (1-based) covers ``|theta|`` in ``((i-1) pi/(LM), i pi/(LM)]``.
After ``M``-fold downsampling the sub-bands fall into ``L`` groups of ``M``
members that land on the same output band.  A group contributes its full
share of information dimension as soon as one member is passed, so the
fraction lost is ``1 - K/(L*M)`` with ``K`` the number of surviving groups.

The count presumes Gaussian inputs whose non-trivial sub-band processes all
have full information dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DivisibilityError, RangeError
from .spectral import BandMask, FrequencyGrid

#: Band edges within this distance (in sub-band units) of a boundary are snapped.
EDGE_SNAP = 1e-9


@dataclass(frozen=True)
class RationalBandMask:
    """Pass/stop pattern over the ``L*M`` sub-bands of ``[0, pi]``."""

    L: int
    M: int
    passed: tuple[bool, ...]

    def __post_init__(self) -> None:
        if self.L < 1:
            raise RangeError(f"L must be >= 1, got {self.L}")
        if self.M < 1:
            raise RangeError(f"M must be >= 1, got {self.M}")
        passed = tuple(bool(p) for p in self.passed)
        if len(passed) != self.L * self.M:
            raise RangeError(f"expected {self.L * self.M} pass flags, got {len(passed)}")
        object.__setattr__(self, "passed", passed)

    @property
    def n_subbands(self) -> int:
        return self.L * self.M

    def to_band_mask(self, grid: FrequencyGrid) -> BandMask:
        """Sample the brick-wall response on ``grid`` (requires ``2LM | N``)."""
        n = grid.n_points
        LM = self.n_subbands
        if n % (2 * LM):
            raise DivisibilityError(f"grid size {n} is not divisible by 2*L*M = {2 * LM}")
        k = np.arange(n)
        fold = np.minimum(k, n - k)
        # 1-based sub-band index: ceil(2 * fold * LM / n), with theta = 0 in band 1
        band = np.maximum(-(-2 * fold * LM // n), 1)
        flags = np.array(self.passed, dtype=np.float64)
        return BandMask(grid, flags[band - 1])


@dataclass(frozen=True)
class RelativeLossResult:
    loss: Fraction
    surviving_groups: int
    L: int
    M: int

    def __str__(self) -> str:
        return (
            f"loss = {self.loss.numerator}/{self.loss.denominator} "
            f"(K={self.surviving_groups}, L={self.L}, M={self.M})"
        )


def subband_group(i: int, L: int) -> int:
    """Group (1..L) of sub-band ``i``: period ``2L`` with a reflection at ``L``."""
    r = (i - 1) % (2 * L)
    return r + 1 if r < L else 2 * L - r


def subband_groups(mask: RationalBandMask) -> list[list[int]]:
    """The ``L`` groups of sub-band indices that alias onto a common band."""
    groups: list[list[int]] = [[] for _ in range(mask.L)]
    for i in range(1, mask.n_subbands + 1):
        groups[subband_group(i, mask.L) - 1].append(i)
    return groups


def relative_loss_rate(mask: RationalBandMask) -> RelativeLossResult:
    surviving = sum(
        1 for group in subband_groups(mask) if any(mask.passed[i - 1] for i in group)
    )
    loss = 1 - Fraction(surviving, mask.n_subbands)
    return RelativeLossResult(loss, surviving, mask.L, mask.M)


def _snap(u: float) -> float:
    nearest = round(u)
    return float(nearest) if abs(u - nearest) < EDGE_SNAP else u


def _normalize_edges(
    edges: Sequence[tuple[float, float]] | Sequence[float] | float,
) -> list[tuple[float, float]]:
    if isinstance(edges, (int, float)):
        return [(0.0, float(edges))]
    out: list[tuple[float, float]] = []
    for item in edges:
        if isinstance(item, (int, float)):
            out.append((0.0, float(item)))
        else:
            lo, hi = item
            out.append((float(lo), float(hi)))
    for lo, hi in out:
        if not 0.0 <= lo <= hi <= math.pi + 1e-12:
            raise RangeError(f"pass-band ({lo}, {hi}) must satisfy 0 <= lo <= hi <= pi")
    return out


def irrational_edge_bounds(
    edges: Sequence[tuple[float, float]] | Sequence[float] | float, M: int, L: int
) -> tuple[RelativeLossResult, RelativeLossResult]:
    """Losses of the two rational masks wedging the pass-bands ``edges``.

    ``edges`` lists pass-band intervals ``(start, stop)`` in ``[0, pi]``; a bare
    number ``e`` stands for the low-pass band ``(0, e)``.  The first result
    rounds every band outward (passes more, loses less), the second inward.
    """
    bands = _normalize_edges(edges)
    LM = L * M
    scale = LM / math.pi
    outer = [False] * LM
    inner = [False] * LM
    for lo, hi in bands:
        a, b = _snap(lo * scale), _snap(hi * scale)
        if b <= a:
            continue
        for i in range(1, LM + 1):
            if i - 1 < b and i > a:
                outer[i - 1] = True
            if a <= i - 1 and i <= b:
                inner[i - 1] = True
    lower = relative_loss_rate(RationalBandMask(L, M, tuple(outer)))
    upper = relative_loss_rate(RationalBandMask(L, M, tuple(inner)))
    return lower, upper

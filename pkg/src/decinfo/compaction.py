"""Optimal energy-compaction masks and the ratios they are built from.

Per output frequency of an ``M``-fold downsampler exactly one of the ``M``
aliasing frequencies is passed: the one where the supplied ratio is largest.
Feeding the ratio ``|S_SX|^2 / (S_S S_X - |S_SX|^2)`` gives the mask that
maximizes the retained information; for additive independent noise this
reduces to the signal-to-noise ratio ``S_S / S_N``.

Masks are built on the half ``0 <= j <= N/(2M)`` of the output grid and
mirrored onto the other half, so they are exactly even-symmetric.  The two
self-mirrored output bins (``j = 0`` and ``j = N/(2M)``) can only pass an alias
that is its own mirror image; if the maximum there is attained solely by a
mirror pair, neither is passed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivisibilityError, RegularityViolation, SpectralDivisionByZero
from .spectral import (
    BandMask,
    DecimationModel,
    FrequencyGrid,
    Spectrum,
    _same_grid,
    alias_matrix,
)

#: Marker in ``winner_index`` for an output bin where nothing is passed.
NO_WINNER = -1
#: Relative floor on ``S_S S_X - |S_SX|^2`` below which a bin is irregular.
REGULARITY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CompactionResult:
    """Binary aliasing-free mask together with the per-output-bin winning alias."""

    mask: BandMask
    winner_index: np.ndarray
    M: int

    def __post_init__(self) -> None:
        w = np.array(self.winner_index, dtype=np.int64)
        w.flags.writeable = False
        object.__setattr__(self, "winner_index", w)

    def rows(self) -> list[tuple[int, float, float, int]]:
        """(bin_index, theta, gain, winner_k) for every input bin."""
        grid = self.mask.grid
        J = grid.n_points // self.M
        theta = grid.theta
        return [
            (i, float(theta[i]), float(self.mask.gains[i]), int(self.winner_index[i % J]))
            for i in range(grid.n_points)
        ]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_index", "theta", "gain", "winner_k"])
            for i, theta, gain, k in self.rows():
                writer.writerow([i, f"{theta:.17g}", f"{gain:.17g}", k])


def _pick(values: np.ndarray, allowed: np.ndarray | None) -> int:
    """Smallest index attaining the maximum, restricted to ``allowed`` if given."""
    best = values.max()
    hits = np.flatnonzero(values == best)
    if allowed is None:
        return int(hits[0])
    hits = [k for k in hits if allowed[k]]
    return int(hits[0]) if hits else NO_WINNER


def compaction_mask(ratio: Spectrum, M: int) -> CompactionResult:
    """Pass, per output bin, the alias where ``ratio`` is maximal."""
    grid = ratio.grid
    n = grid.n_points
    if M < 1 or n % (2 * M):
        raise DivisibilityError(f"grid size {n} is not divisible by 2*{M}")
    J = n // M
    half = J // 2
    R = alias_matrix(ratio.values, M)  # R[k, j]
    winners = np.full(J, NO_WINNER, dtype=np.int64)

    k = np.arange(M)
    self_mirror_0 = (M - k) % M == k
    self_mirror_half = (M - 1 - k) == k
    winners[0] = _pick(R[:, 0], self_mirror_0)
    for j in range(1, half):
        winners[j] = _pick(R[:, j], None)
    winners[half] = _pick(R[:, half], self_mirror_half)
    for j in range(half + 1, J):
        winners[j] = M - 1 - winners[J - j]

    gains = np.zeros((M, J))
    chosen = winners != NO_WINNER
    gains[winners[chosen], np.flatnonzero(chosen)] = 1.0
    mask = BandMask(grid, gains.reshape(n))
    return CompactionResult(mask, winners, M)


def theorem2_ratio(model: DecimationModel) -> Spectrum:
    """``|S_SX|^2 / (S_S S_X - |S_SX|^2)`` per bin.

    An isolated bin where both numerator and denominator vanish (for instance
    a spectral zero of the signal) takes the mean of its neighbours.
    """
    num = np.abs(model.cross.values) ** 2
    den = model.signal_psd.values * model.observation_psd.values - num
    scale = max(1.0, float(np.max(model.signal_psd.values * model.observation_psd.values)))
    floor = REGULARITY_RTOL * scale
    if np.any(den < -floor):
        k = int(np.argmin(den))
        raise RegularityViolation("S_S*S_X - |S_SX|^2 is negative", bin_index=k)
    bad = den <= floor
    if not np.any(bad):
        return Spectrum(model.grid, num / den)
    n = den.size
    runs = bad & (np.roll(bad, 1) | np.roll(bad, -1))
    if np.any(runs):
        k = int(np.flatnonzero(runs)[0])
        raise RegularityViolation("S_S*S_X - |S_SX|^2 vanishes on a band", bin_index=k)
    blowup = bad & (num > floor)
    if np.any(blowup):
        k = int(np.flatnonzero(blowup)[0])
        raise RegularityViolation("ratio is unbounded (perfect coherence)", bin_index=k)
    out = num / np.where(bad, 1.0, den)
    idx = np.flatnonzero(bad)
    out[idx] = 0.5 * (out[(idx - 1) % n] + out[(idx + 1) % n])
    return Spectrum(model.grid, out)


def snr_ratio(S_S: Spectrum, S_N: Spectrum) -> Spectrum:
    """Pointwise signal-to-noise ratio ``S_S / S_N``."""
    _same_grid(S_S.grid, S_N.grid)
    if np.any(S_N.values <= 0.0):
        k = int(np.flatnonzero(S_N.values <= 0.0)[0])
        raise SpectralDivisionByZero(f"noise PSD vanishes at bin {k}")
    return Spectrum(S_S.grid, S_S.values / S_N.values)


def ideal_lowpass_mask(grid: FrequencyGrid, M: int) -> BandMask:
    """Brick-wall low-pass passing ``|theta| < pi/M`` (the edge bin is stopped)."""
    n = grid.n_points
    if M < 1 or n % M:
        raise DivisibilityError(f"grid size {n} is not divisible by {M}")
    if M == 1:
        return BandMask.ones(grid)
    k = np.arange(n)
    fold = np.minimum(k, n - k)
    return BandMask(grid, (2 * M * fold < n).astype(np.float64))

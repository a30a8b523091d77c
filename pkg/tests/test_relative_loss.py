from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decinfo.errors import DivisibilityError, RangeError
from decinfo.relative_loss import (
    RationalBandMask,
    irrational_edge_bounds,
    relative_loss_rate,
    subband_groups,
)
from decinfo.spectral import FrequencyGrid, Spectrum, downsampled_psd


def overlap_groups(L: int, M: int) -> list[frozenset[int]]:
    """Group sub-bands by the support of their downsampled brick-wall spectra."""
    n = 8 * L * M
    grid = FrequencyGrid(n)
    by_support: dict[frozenset[int], set[int]] = {}
    for i in range(1, L * M + 1):
        flags = tuple(k == i - 1 for k in range(L * M))
        band = Spectrum(grid, RationalBandMask(L, M, flags).to_band_mask(grid).gains)
        out = downsampled_psd(band, M).values
        # output sub-band edges sit on every fourth bin; compare interiors only
        support = frozenset(int(b) for b in np.flatnonzero(out > 0) if b % 4)
        by_support.setdefault(support, set()).add(i)
    return sorted((frozenset(s) for s in by_support.values()), key=min)


def folding_groups(L: int, M: int) -> list[frozenset[int]]:
    """Group sub-bands by where their midpoint lands after M-fold folding."""
    groups: dict[int, set[int]] = {}
    for i in range(1, L * M + 1):
        mid = (i - 0.5) * math.pi / (L * M)
        w = math.fmod(M * mid, 2 * math.pi)
        w = w if w <= math.pi else 2 * math.pi - w
        groups.setdefault(int(w * L / math.pi), set()).add(i)
    return sorted((frozenset(s) for s in groups.values()), key=min)


def _canonical(groups):
    return sorted((frozenset(g) for g in groups), key=min)


class TestGroups:
    def test_single(self):
        assert subband_groups(RationalBandMask(1, 2, (True, True))) == [[1, 2]]

    def test_l2_m2(self):
        assert _canonical(subband_groups(RationalBandMask(2, 2, (True,) * 4))) == [
            frozenset({1, 4}),
            frozenset({2, 3}),
        ]

    def test_l2_m3(self):
        groups = subband_groups(RationalBandMask(2, 3, (True,) * 6))
        assert len(groups) == 2 and all(len(g) == 3 for g in groups)

    @pytest.mark.parametrize("L", range(1, 9))
    @pytest.mark.parametrize("M", range(1, 5))
    def test_matches_spectral_oracles(self, L, M):
        rule = _canonical(subband_groups(RationalBandMask(L, M, (True,) * (L * M))))
        assert rule == overlap_groups(L, M)
        assert rule == folding_groups(L, M)


class TestLoss:
    def test_all_pass_m2(self):
        r = relative_loss_rate(RationalBandMask(1, 2, (True, True)))
        assert r.loss == Fraction(1, 2)

    def test_ideal_lowpass_m2(self):
        r = relative_loss_rate(RationalBandMask(1, 2, (True, False)))
        assert r.loss == Fraction(1, 2)
        assert str(r) == "loss = 1/2 (K=1, L=1, M=2)"

    def test_single_subband(self):
        r = relative_loss_rate(RationalBandMask(2, 2, (True, False, False, False)))
        assert r.surviving_groups == 1
        assert r.loss == Fraction(3, 4)

    @pytest.mark.parametrize("L, M", [(1, 2), (3, 3), (8, 4)])
    def test_all_pass_and_all_block(self, L, M):
        assert relative_loss_rate(RationalBandMask(L, M, (True,) * (L * M))).loss == Fraction(M - 1, M)
        blocked = relative_loss_rate(RationalBandMask(L, M, (False,) * (L * M)))
        assert blocked.loss == 1 and blocked.surviving_groups == 0

    def test_bad_flag_count(self):
        with pytest.raises(RangeError):
            RationalBandMask(2, 2, (True,))

    @given(st.integers(1, 8), st.integers(1, 4), st.data())
    @settings(max_examples=500, deadline=None)
    def test_bound(self, L, M, data):
        flags = tuple(data.draw(st.lists(st.booleans(), min_size=L * M, max_size=L * M)))
        r = relative_loss_rate(RationalBandMask(L, M, flags))
        assert isinstance(r.loss, Fraction)
        assert r.loss >= Fraction(M - 1, M)
        assert r.loss == 1 - Fraction(r.surviving_groups, L * M)
        assert 0 <= r.surviving_groups <= L


class TestBandMask:
    def test_to_band_mask(self):
        grid = FrequencyGrid(16)
        g = RationalBandMask(2, 2, (True, False, False, True)).to_band_mask(grid).gains
        # sub-band 1: |theta| <= pi/4 ; sub-band 4: 3pi/4 < |theta| <= pi
        assert list(np.flatnonzero(g)) == [0, 1, 2, 7, 8, 9, 14, 15]

    def test_divisibility(self):
        with pytest.raises(DivisibilityError):
            RationalBandMask(3, 2, (True,) * 6).to_band_mask(FrequencyGrid(16))


class TestIrrationalEdges:
    def test_rational_edges_coincide(self):
        lo, hi = irrational_edge_bounds([(0.0, math.pi / 2)], 2, 4)
        assert lo.loss == hi.loss

    def test_bracket(self):
        lo, hi = irrational_edge_bounds(math.pi / math.sqrt(2), 2, 10)
        assert lo.loss <= hi.loss
        assert hi.loss - lo.loss <= Fraction(1, 20)

    def test_gap_non_increasing_in_l(self):
        gaps = []
        for L in (4, 8, 16, 32):
            lo, hi = irrational_edge_bounds(math.pi / math.sqrt(2), 2, L)
            gaps.append(hi.loss - lo.loss)
        assert all(b <= a for a, b in zip(gaps, gaps[1:]))

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            irrational_edge_bounds([(0.0, 4.0)], 2, 4)

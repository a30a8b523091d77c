"""Random and reference models shared by the test suites."""

from __future__ import annotations

import math

import numpy as np

from decinfo.spectral import (
    BandMask,
    CrossSpectrum,
    DecimationModel,
    FirFilter,
    FrequencyGrid,
    Spectrum,
    fir_magnitude_squared,
    psd_from_autocorr,
)

#: Grid used by randomized suites: divisible by 2M for M = 2, 3, 4.
RANDOM_GRID = 768
HALF_LN_2PI_E = 0.5 * math.log(2 * math.pi * math.e)



def cosine_model(grid: FrequencyGrid, M: int, sigma2: float = 1.0) -> DecimationModel:
    """Signal 1 + cos(theta) in white noise of variance ``sigma2``."""
    return DecimationModel.additive(
        psd_from_autocorr([1.0, 0.5], grid), Spectrum.white(grid, sigma2), M
    )


def random_trig_psd(rng: np.random.Generator, grid: FrequencyGrid, degree: int = 3, floor: float = 0.05) -> Spectrum:
    """|B|^2 + floor for a random real polynomial B of the given degree."""
    b = rng.normal(size=rng.integers(1, degree + 2))
    r = np.correlate(b, b, mode="full")[b.size - 1 :]
    r[0] += floor
    return psd_from_autocorr(r, grid)


def random_additive_model(rng: np.random.Generator, grid: FrequencyGrid, M: int) -> DecimationModel:
    signal = random_trig_psd(rng, grid)
    noise = Spectrum.white(grid, float(rng.uniform(0.1, 10.0)))
    return DecimationModel.additive(signal, noise, M)


def fir_response(coeffs: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """Complex frequency response sum_p f[p] e^{-j p theta} on the grid."""
    p = np.arange(len(coeffs))
    return np.exp(-1j * np.outer(grid.theta, p)) @ np.asarray(coeffs, dtype=float)


def random_general_model(rng: np.random.Generator, grid: FrequencyGrid, M: int) -> DecimationModel:
    """X = F * S + N: a filtered signal in coloured noise."""
    signal = random_trig_psd(rng, grid)
    noise = random_trig_psd(rng, grid, degree=2, floor=0.1)
    F = fir_response(rng.normal(size=rng.integers(1, 4)), grid)
    observation = Spectrum(grid, np.abs(F) ** 2 * signal.values + noise.values)
    cross = CrossSpectrum(grid, signal.values * np.conj(F))
    return DecimationModel.general(signal, observation, cross, M)


def random_fir_mask(rng: np.random.Generator, grid: FrequencyGrid, max_order: int = 4) -> BandMask:
    return fir_magnitude_squared(FirFilter(rng.normal(size=rng.integers(1, max_order + 2))), grid)


def random_aliasing_free_mask(rng: np.random.Generator, grid: FrequencyGrid, M: int) -> BandMask:
    """Random even binary mask passing at most one alias per output bin.

    A pass at input bin i forces a pass at its mirror (N - i) mod N, so at the
    two self-mirrored output bins only a self-mirrored alias may be chosen.
    """
    n = grid.n_points
    J = n // M
    gains = np.zeros(n)
    for j in range(J // 2 + 1):
        aliases = [(j + k * J) % n for k in range(M)]
        if j in (0, J // 2):
            aliases = [i for i in aliases if (n - i) % n == i]
            if not aliases:
                continue
        i = aliases[rng.integers(len(aliases))]
        gains[i] = gains[(n - i) % n] = 1.0
    return BandMask(grid, gains)

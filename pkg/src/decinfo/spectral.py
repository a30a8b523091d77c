"""Frequency grids, spectra, masks and the quadrature rules used throughout.

Bin ``k`` of an ``N``-point grid sits at the angular frequency
``theta_k = 2*pi*k/N`` on ``[0, 2*pi)``.  With this convention the ``M``
frequencies that alias onto one output frequency of an ``M``-fold
downsampler are plain index arithmetic, ``(j + k*N/M) mod N``, and no
interpolation is ever needed.

All integrals over a period are evaluated with the rectangle rule, which is
exact for trigonometric polynomials of degree below ``N`` and spectrally
accurate for smooth periodic integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    CauchySchwarzViolation,
    ConfigError,
    DivisibilityError,
    GridMismatchError,
    LengthMismatchError,
    NegativePsdError,
    PreconditionError,
    RangeError,
    SymmetryError,
)

NEG_INFINITY = float("-inf")
DEFAULT_GRID_SIZE = 4096

#: Negative values above ``-CLAMP_TOL`` are roundoff and are clamped to zero.
CLAMP_TOL = 1e-12
#: Relative tolerance for accepting user-supplied even/Hermitian symmetry.
SYMMETRY_RTOL = 1e-10
#: A sample at or below ``ZERO_RTOL * max`` counts as a zero of the function.
ZERO_RTOL = 1e-12


def _double_root_offset(n: int) -> float:
    """Value to add to the neighbours' log at a bin holding a double root.

    Writing the function as ``|1 - e^{j(theta - theta0)}|^2 * q(theta)``, the
    rectangle rule omitting the root bin sums ``2 ln|2 sin(pi k/n)|`` to
    ``2 ln n``, while the exact integral of that factor is zero.  Assigning
    ``ln q(theta0) - 2 ln n`` to the root bin therefore makes the rule exact
    up to the smoothness of ``q``; ``ln q(theta0)`` is recovered from the
    neighbours, where the root factor equals ``4 sin^2(pi/n)``.
    """
    return -2.0 * math.log(2.0 * n * math.sin(math.pi / n))


def _frozen(values: np.ndarray) -> np.ndarray:
    values.flags.writeable = False
    return values


@lru_cache(maxsize=64)
def _cos_table(n: int) -> np.ndarray:
    """cos(2*pi*i/n) for i in [0, n), with table[i] == table[n - i] bit-exactly."""
    i = np.arange(n)
    return _frozen(np.cos(2.0 * np.pi * np.minimum(i, n - i) / n))


@lru_cache(maxsize=64)
def _sin_table(n: int) -> np.ndarray:
    """sin(2*pi*i/n) with table[i] == -table[n - i] bit-exactly."""
    i = np.arange(n)
    fold = np.minimum(i, n - i)
    sign = np.where(i <= n - i, 1.0, -1.0)
    return _frozen(sign * np.sin(2.0 * np.pi * fold / n))


def smallest_valid_grid(factor: int, minimum: int = DEFAULT_GRID_SIZE) -> int:
    """Smallest multiple of ``2*factor`` that is at least ``minimum``."""
    step = 2 * factor
    return step * -(-minimum // step)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid of ``n_points`` angular frequencies on ``[0, 2*pi)``."""

    n_points: int

    def __post_init__(self) -> None:
        if isinstance(self.n_points, bool) or not isinstance(self.n_points, (int, np.integer)):
            raise RangeError(f"n_points must be an integer, got {self.n_points!r}")
        if self.n_points <= 0:
            raise RangeError(f"n_points must be positive, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.n_points

    def mirror_index(self) -> np.ndarray:
        """Index of the bin at ``-theta_k``, i.e. ``(N - k) mod N``."""
        k = np.arange(self.n_points)
        return (self.n_points - k) % self.n_points

    def require_factor(self, factor: int) -> None:
        """Raise unless ``2*factor`` divides the grid size."""
        if factor < 1 or self.n_points % (2 * factor):
            raise DivisibilityError(
                f"grid size {self.n_points} is not divisible by 2*{factor}"
            )


def _as_real_samples(grid: FrequencyGrid, values: Any, what: str) -> np.ndarray:
    v = np.array(values, dtype=np.float64).ravel()
    if v.size != grid.n_points:
        raise LengthMismatchError(f"{what}: expected {grid.n_points} values, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what}: values must be finite")
    v[(v < 0.0) & (v > -CLAMP_TOL)] = 0.0
    v += 0.0  # normalizes -0.0
    if np.any(v < 0.0):
        k = int(np.argmin(v))
        raise NegativePsdError(f"{what}: value {v[k]:.3e} < 0 at bin {k}")
    return v


def _check_even(grid: FrequencyGrid, v: np.ndarray, what: str) -> None:
    mirror = v[grid.mirror_index()]
    scale = max(1.0, float(np.max(np.abs(v)))) if v.size else 1.0
    err = np.max(np.abs(v - mirror)) if v.size else 0.0
    if err > SYMMETRY_RTOL * scale:
        raise SymmetryError(f"{what} is not even-symmetric (max deviation {err:.3e})")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Nonnegative, even power spectral density sampled on a grid.

    ``values`` are normalized so that their mean equals the process variance,
    i.e. ``mean(values) = (1/2pi) * integral of S``.
    """

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = _as_real_samples(self.grid, self.values, "Spectrum")
        _check_even(self.grid, v, "Spectrum")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def white(cls, grid: FrequencyGrid, variance: float) -> Spectrum:
        return cls(grid, np.full(grid.n_points, float(variance)))

    @property
    def variance(self) -> float:
        return float(np.mean(self.values))

    def scaled(self, factor: float) -> Spectrum:
        return Spectrum(self.grid, self.values * float(factor))


@dataclass(frozen=True, eq=False)
class CrossSpectrum:
    """Complex cross power spectral density with Hermitian symmetry."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.complex128).ravel()
        if v.size != self.grid.n_points:
            raise LengthMismatchError(
                f"CrossSpectrum: expected {self.grid.n_points} values, got {v.size}"
            )
        scale = max(1.0, float(np.max(np.abs(v))))
        err = np.max(np.abs(v - np.conj(v[self.grid.mirror_index()])))
        if err > SYMMETRY_RTOL * scale:
            raise SymmetryError(f"CrossSpectrum is not Hermitian (max deviation {err:.3e})")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_spectrum(cls, s: Spectrum) -> CrossSpectrum:
        return cls(s.grid, s.values.astype(np.complex128))

    def magnitude_squared(self) -> Spectrum:
        return Spectrum(self.grid, np.abs(self.values) ** 2)


@dataclass(frozen=True, eq=False)
class FirFilter:
    """Real FIR impulse response ``h[0..P]``."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        h = np.array(self.coeffs, dtype=np.float64).ravel()
        if h.size == 0 or not np.any(h != 0.0):
            raise PreconditionError("an FIR filter needs at least one nonzero tap")
        if not np.all(np.isfinite(h)):
            raise ValueError("FIR coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(h))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def autocorrelation(self) -> np.ndarray:
        """rho[m] = sum_p h[p] h[p+m] for m = 0..P."""
        h = self.coeffs
        return np.correlate(h, h, mode="full")[h.size - 1 :]


@dataclass(frozen=True, eq=False)
class BandMask:
    """Squared magnitude response ``|H(e^{j theta_k})|^2`` per grid bin."""

    grid: FrequencyGrid
    gains: np.ndarray

    def __post_init__(self) -> None:
        g = _as_real_samples(self.grid, self.gains, "BandMask")
        _check_even(self.grid, g, "BandMask")
        object.__setattr__(self, "gains", _frozen(g))

    @classmethod
    def ones(cls, grid: FrequencyGrid) -> BandMask:
        return cls(grid, np.ones(grid.n_points))

    def scaled(self, factor: float) -> BandMask:
        return BandMask(self.grid, self.gains * float(factor))

    def times(self, other: BandMask) -> BandMask:
        _same_grid(self.grid, other.grid)
        return BandMask(self.grid, self.gains * other.gains)


@dataclass(frozen=True, eq=False)
class DecimationModel:
    """Signal PSD plus either an independent additive noise PSD or a general
    (observation PSD, cross PSD) pair, together with the factor ``M``.

    Use :meth:`additive` or :meth:`general` to build one.
    """

    signal_psd: Spectrum
    M: int
    noise_psd: Spectrum | None = None
    observation_psd: Spectrum | None = None
    cross: CrossSpectrum | None = None

    def __post_init__(self) -> None:
        grid = self.signal_psd.grid
        if self.M < 2:
            raise RangeError(f"downsampling factor must be >= 2, got {self.M}")
        grid.require_factor(self.M)
        if self.noise_psd is not None:
            if self.observation_psd is not None or self.cross is not None:
                raise ValueError("give either noise_psd or (observation_psd, cross), not both")
            _same_grid(grid, self.noise_psd.grid)
            s = self.signal_psd.values
            object.__setattr__(
                self, "observation_psd", Spectrum(grid, s + self.noise_psd.values)
            )
            object.__setattr__(self, "cross", CrossSpectrum.from_spectrum(self.signal_psd))
            return
        if self.observation_psd is None or self.cross is None:
            raise ValueError("a general model needs observation_psd and cross")
        _same_grid(grid, self.observation_psd.grid)
        _same_grid(grid, self.cross.grid)
        bound = self.signal_psd.values * self.observation_psd.values
        excess = np.abs(self.cross.values) ** 2 - bound
        tol = 1e-12 * max(1.0, float(np.max(bound)))
        if np.any(excess > tol):
            k = int(np.argmax(excess))
            raise CauchySchwarzViolation(f"|S_SX|^2 > S_S*S_X at bin {k}")

    @classmethod
    def additive(cls, signal: Spectrum, noise: Spectrum, M: int) -> DecimationModel:
        return cls(signal_psd=signal, M=M, noise_psd=noise)

    @classmethod
    def general(
        cls, signal: Spectrum, observation: Spectrum, cross: CrossSpectrum, M: int
    ) -> DecimationModel:
        return cls(signal_psd=signal, M=M, observation_psd=observation, cross=cross)

    @property
    def is_additive(self) -> bool:
        return self.noise_psd is not None

    @property
    def grid(self) -> FrequencyGrid:
        return self.signal_psd.grid

    def with_noise(self, noise: Spectrum) -> DecimationModel:
        return DecimationModel.additive(self.signal_psd, noise, self.M)


def _same_grid(a: FrequencyGrid, b: FrequencyGrid) -> None:
    if a.n_points != b.n_points:
        raise GridMismatchError(f"grid sizes differ: {a.n_points} vs {b.n_points}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def make_grid(n_points: int, M: int = 1) -> FrequencyGrid:
    grid = FrequencyGrid(n_points)
    grid.require_factor(M)
    return grid


def _cosine_series(coeffs: Sequence[float] | np.ndarray, n: int) -> np.ndarray:
    """c[0] + 2*sum_m c[m] cos(m*theta_k), evenly symmetric bit for bit."""
    c = np.asarray(coeffs, dtype=np.float64)
    table = _cos_table(n)
    k = np.arange(n)
    acc = np.full(n, c[0] if c.size else 0.0)
    for m in range(1, c.size):
        if c[m] != 0.0:
            acc += (2.0 * c[m]) * table[(m * k) % n]
    return acc


def psd_from_autocorr(r: Sequence[float], grid: FrequencyGrid) -> Spectrum:
    """PSD of the real autocorrelation ``r[0..K]``: r0 + 2*sum r[m] cos(m theta)."""
    r = np.asarray(r, dtype=np.float64).ravel()
    if r.size == 0:
        raise ValueError("autocorrelation sequence is empty")
    return Spectrum(grid, _cosine_series(r, grid.n_points))


def fir_magnitude_squared(h: FirFilter, grid: FrequencyGrid) -> BandMask:
    gains = _cosine_series(h.autocorrelation(), grid.n_points)
    return BandMask(grid, np.maximum(gains, 0.0))


def alias_bins(grid: FrequencyGrid, M: int, j: int) -> list[int]:
    """Input bins folding onto output bin ``j`` of an ``M``-fold downsampler."""
    n = grid.n_points
    if n % M:
        raise DivisibilityError(f"grid size {n} is not divisible by {M}")
    step = n // M
    if not 0 <= j < step:
        raise RangeError(f"output bin {j} outside [0, {step})")
    return [(j + k * step) % n for k in range(M)]


def alias_matrix(values: np.ndarray, M: int) -> np.ndarray:
    """View ``values`` as (M, N/M): row k, column j is bin j + k*N/M."""
    n = values.shape[-1]
    if n % M:
        raise DivisibilityError(f"grid size {n} is not divisible by {M}")
    return values.reshape(values.shape[:-1] + (M, n // M))


def downsampled_psd(s: Spectrum, M: int) -> Spectrum:
    """PSD after keeping every M-th sample: (1/M) * sum of the M alias bins."""
    # Summing in sorted order makes mirrored output bins bit-identical.
    folded = np.sort(alias_matrix(s.values, M), axis=0).sum(axis=0) / M
    return Spectrum(FrequencyGrid(s.grid.n_points // M), folded)


def apply_mask(s: Spectrum, m: BandMask) -> Spectrum:
    _same_grid(s.grid, m.grid)
    return Spectrum(s.grid, s.values * m.gains)


def apply_mask_cross(c: CrossSpectrum, m: BandMask) -> CrossSpectrum:
    """Cross PSD after filtering the second process, with H = sqrt(|H|^2) >= 0."""
    _same_grid(c.grid, m.grid)
    return CrossSpectrum(c.grid, c.values * np.sqrt(m.gains))


def autocorr_from_psd(s: Spectrum, max_lag: int) -> np.ndarray:
    """r[m] = (1/2pi) * integral S(theta) e^{j m theta}, m = 0..max_lag."""
    n = s.grid.n_points
    if not 0 <= max_lag < n / 2:
        raise RangeError(f"max_lag {max_lag} must lie in [0, {n / 2})")
    table = _cos_table(n)
    k = np.arange(n)
    r = np.empty(max_lag + 1)
    chunk = 256
    for start in range(0, max_lag + 1, chunk):
        m = np.arange(start, min(start + chunk, max_lag + 1))
        r[m] = table[np.outer(m, k) % n] @ s.values / n
    return r


def crosscorr_from_cross_psd(c: CrossSpectrum, lags: Sequence[int] | np.ndarray) -> np.ndarray:
    """R[m] = (1/2pi) * integral S_SX(theta) e^{j m theta}; E[S_{t+m} X_t] = R[m]."""
    n = c.grid.n_points
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size and np.max(np.abs(lags)) >= n / 2:
        raise RangeError(f"lags must satisfy |m| < {n / 2}")
    cos_t, sin_t = _cos_table(n), _sin_table(n)
    k = np.arange(n)
    re, im = c.values.real, c.values.imag
    out = np.empty(lags.size)
    chunk = 256
    for start in range(0, lags.size, chunk):
        m = lags[start : start + chunk]
        idx = np.outer(m, k) % n
        out[start : start + chunk] = (cos_t[idx] @ re - sin_t[idx] @ im) / n
    return out


def noise_gain(h: FirFilter) -> float:
    return float(np.sum(h.coeffs**2))


def mean_log(values: np.ndarray) -> float:
    """Grid average of ln(values) with a rule for zeros of the sampled function.

    A zero sample whose neighbours are both nonzero is taken to be a double
    root landing on the bin (as for a real filter or PSD with a zero on the
    unit circle) and is given the value that keeps the rule exact for such a
    root.  Two or more adjacent zero samples are a zero band and the result
    is ``-inf``.
    """
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    top = float(np.max(v)) if n else 0.0
    if top <= 0.0:
        return NEG_INFINITY
    zero = v <= ZERO_RTOL * top
    if not np.any(zero):
        return float(np.mean(np.log(v)))
    if np.any(zero & (np.roll(zero, 1) | np.roll(zero, -1))) or n < 3:
        return NEG_INFINITY
    logs = np.log(np.where(zero, 1.0, v))
    idx = np.flatnonzero(zero)
    neighbours = 0.5 * (logs[(idx - 1) % n] + logs[(idx + 1) % n])
    logs[idx] = neighbours + _double_root_offset(n)
    return float(np.mean(logs))


def paley_wiener_integral(m: BandMask) -> float:
    """(1/2pi) * integral of ln|H|, or ``-inf`` when H vanishes on a band."""
    return 0.5 * mean_log(m.gains)


def integrate(grid: FrequencyGrid, samples: Sequence[float] | np.ndarray) -> float:
    """Rectangle rule over one period: (2pi/N) * sum(samples)."""
    x = np.asarray(samples)
    if x.shape != (grid.n_points,):
        raise LengthMismatchError(f"expected {grid.n_points} samples, got shape {x.shape}")
    return float(grid.spacing * np.sum(x))


def resample_spectrum(s: Spectrum, n_points: int) -> Spectrum:
    """Trigonometric interpolation of ``s`` onto an ``n_points`` grid.

    Exact for trigonometric polynomials of degree below ``min(N, n)/2``.
    Small negative overshoot is clipped to zero.
    """
    n_old = s.grid.n_points
    if n_points == n_old:
        return s
    lags = min(n_old, n_points) // 2 - 1
    r = autocorr_from_psd(s, lags)
    a = np.zeros(n_points)
    a[0] = r[0]
    a[1 : lags + 1] = r[1:]
    if lags:
        a[n_points - lags :] = r[1:][::-1]
    half = np.fft.rfft(a).real
    full = np.concatenate([half, half[1 : (n_points + 1) // 2][::-1]])
    return Spectrum(FrequencyGrid(n_points), np.maximum(full, 0.0))


# ---------------------------------------------------------------------------
# JSON model fragments
# ---------------------------------------------------------------------------


def spectrum_from_json(obj: Mapping[str, Any], grid: FrequencyGrid, field: str = "psd") -> Spectrum:
    """Build a spectrum from ``{"type": "trigpoly"|"white"|"grid", ...}``."""
    if not isinstance(obj, Mapping):
        raise ConfigError("expected an object with a 'type' key", field)
    kind = obj.get("type")
    try:
        if kind == "trigpoly":
            r = obj.get("r")
            if not isinstance(r, list) or not r:
                raise ConfigError("'r' must be a non-empty list of numbers", f"{field}.r")
            return psd_from_autocorr([float(x) for x in r], grid)
        if kind == "white":
            if "variance" not in obj:
                raise ConfigError("missing 'variance'", f"{field}.variance")
            var = float(obj["variance"])
            if var < 0:
                raise ConfigError("variance must be nonnegative", f"{field}.variance")
            return Spectrum.white(grid, var)
        if kind == "grid":
            values = obj.get("values")
            if not isinstance(values, list):
                raise ConfigError("'values' must be a list", f"{field}.values")
            if len(values) != grid.n_points:
                raise ConfigError(
                    f"expected {grid.n_points} values, got {len(values)}", f"{field}.values"
                )
            return Spectrum(grid, [float(x) for x in values])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field) from exc
    raise ConfigError(f"unknown spectrum type {kind!r}", f"{field}.type")


def cross_from_json(obj: Mapping[str, Any], grid: FrequencyGrid, field: str = "cross") -> CrossSpectrum:
    """``{"type": "grid", "re": [...], "im": [...]}`` or any real spectrum fragment."""
    if isinstance(obj, Mapping) and obj.get("type") == "grid" and "re" in obj:
        re = obj.get("re")
        im = obj.get("im", [0.0] * len(re))
        if not isinstance(re, list) or not isinstance(im, list) or len(re) != len(im):
            raise ConfigError("'re' and 'im' must be lists of equal length", field)
        if len(re) != grid.n_points:
            raise ConfigError(f"expected {grid.n_points} values, got {len(re)}", f"{field}.re")
        try:
            return CrossSpectrum(grid, np.asarray(re, float) + 1j * np.asarray(im, float))
        except ValueError as exc:
            raise ConfigError(str(exc), field) from exc
    return CrossSpectrum.from_spectrum(spectrum_from_json(obj, grid, field))

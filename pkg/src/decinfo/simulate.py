"""Monte-Carlo check of the spectral identities: synthesize a stationary Gaussian
sequence, filter and decimate it, and compare a Welch estimate of the output
PSD with the alias-sum prediction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import welch

from .errors import RangeError
from .rng import Xoshiro256StarStar
from .spectral import (
    DecimationModel,
    FirFilter,
    FrequencyGrid,
    Spectrum,
    apply_mask,
    downsampled_psd,
    fir_magnitude_squared,
    resample_spectrum,
)

DUMP_MAGIC = b"DCIMSIM1"
DEFAULT_SEGMENT = 32
DEFAULT_OVERLAP = 0.5


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class SampleRecord:
    samples: np.ndarray
    seed: int
    psd_source: str

    def __post_init__(self) -> None:
        x = np.array(self.samples, dtype=np.float64)
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)


def synthesize_gaussian(s: Spectrum, n: int, seed: int, psd_source: str = "spectrum") -> SampleRecord:
    """Periodic stationary Gaussian sequence of length ``n`` with PSD ``s``.

    Complex standard Gaussians per DFT bin (real at DC and Nyquist) are
    scaled by ``sqrt(n * S)`` and inverse transformed.  Draw order: DC, then
    real and imaginary parts of bins ``1 .. n/2 - 1``, then the Nyquist bin.
    """
    if not _is_pow2(n) or n < 1024:
        raise RangeError(f"n must be a power of two >= 1024, got {n}")
    spec = resample_spectrum(s, n).values
    rng = Xoshiro256StarStar(seed)
    z = rng.normals(n)
    half = n // 2
    coef = np.empty(half + 1, dtype=np.complex128)
    coef[0] = z[0]
    coef[1:half] = (z[1 : n - 1 : 2] + 1j * z[2:n:2]) / math.sqrt(2.0)
    coef[half] = z[n - 1]
    coef *= np.sqrt(n * spec[: half + 1])
    return SampleRecord(np.fft.irfft(coef, n=n), seed, psd_source)


def decimate(x: np.ndarray, h: FirFilter, M: int) -> np.ndarray:
    """``y[k] = sum_p h[p] x[(kM - p) mod len(x)]`` for ``k < len(x) // M``."""
    x = np.asarray(x, dtype=np.float64)
    if M < 1:
        raise RangeError(f"M must be >= 1, got {M}")
    if x.size < h.coeffs.size:
        raise RangeError("input is shorter than the filter")
    filtered = np.zeros_like(x)
    for p, hp in enumerate(h.coeffs):
        if hp != 0.0:
            filtered += hp * np.roll(x, p)
    return filtered[::M][: x.size // M]


def welch_psd(x: np.ndarray, segment_len: int, overlap_fraction: float = DEFAULT_OVERLAP) -> Spectrum:
    """Hann-window Welch estimate on a ``segment_len``-point grid.

    The record mean is removed first; the estimate is two-sided and scaled so
    that white noise of variance ``v`` gives values near ``v``.
    """
    x = np.asarray(x, dtype=np.float64)
    if not _is_pow2(segment_len) or segment_len > x.size // 4:
        raise RangeError(f"segment_len must be a power of two <= len(x)/4, got {segment_len}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise RangeError(f"overlap must lie in [0, 1), got {overlap_fraction}")
    centered = x - np.mean(x)
    _, p = welch(
        centered,
        fs=1.0,
        window="hann",
        nperseg=segment_len,
        noverlap=int(segment_len * overlap_fraction),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    grid = FrequencyGrid(segment_len)
    p = 0.5 * (p + p[grid.mirror_index()])
    return Spectrum(grid, p)


@dataclass(frozen=True, eq=False)
class EmpiricalReport:
    rms_relative_deviation: float
    max_relative_deviation: float
    estimate: Spectrum
    reference: Spectrum
    sample_variance: float
    expected_variance: float

    def as_dict(self) -> dict[str, float]:
        return {
            "rms_relative_deviation": self.rms_relative_deviation,
            "max_relative_deviation": self.max_relative_deviation,
            "sample_variance": self.sample_variance,
            "expected_variance": self.expected_variance,
        }


def empirical_check(
    model: DecimationModel,
    h: FirFilter,
    M: int,
    n: int,
    seed: int,
    segment_len: int = DEFAULT_SEGMENT,
    overlap_fraction: float = DEFAULT_OVERLAP,
) -> EmpiricalReport:
    """Welch estimate of the decimated output against the alias-sum PSD."""
    record = synthesize_gaussian(model.observation_psd, n, seed, "observation")
    y = decimate(record.samples, h, M)
    estimate = welch_psd(y, segment_len, overlap_fraction)
    fine = resample_spectrum(model.observation_psd, segment_len * M)
    filtered = apply_mask(fine, fir_magnitude_squared(h, fine.grid))
    reference = downsampled_psd(filtered, M)
    rel = (estimate.values - reference.values) / reference.values
    return EmpiricalReport(
        rms_relative_deviation=float(np.sqrt(np.mean(rel**2))),
        max_relative_deviation=float(np.max(np.abs(rel))),
        estimate=estimate,
        reference=reference,
        sample_variance=float(np.var(y)),
        expected_variance=reference.variance,
    )


def write_dump(path: str | Path, record: SampleRecord, model: object = None) -> Path:
    """Write ``DCIMSIM1`` + little-endian float64 samples, plus a JSON sidecar."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        fh.write(record.samples.astype("<f8").tobytes())
    sidecar = path.with_name(path.name + ".json")
    meta = {
        "seed": record.seed,
        "model": model if model is not None else record.psd_source,
        "n": int(record.samples.size),
    }
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return sidecar


def read_dump(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[: len(DUMP_MAGIC)] != DUMP_MAGIC:
        raise ValueError(f"{path}: missing {DUMP_MAGIC!r} header")
    return np.frombuffer(data[len(DUMP_MAGIC) :], dtype="<f8").copy()

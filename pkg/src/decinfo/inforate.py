"""Entropy and mutual-information rates of Gaussian processes, before and after
decimation, together with the resulting relevant information loss.

Rates are in nats.  Input-side rates are per input sample, blocked rates are
per output sample of the ``M``-fold downsampler (equivalently per block of
``M`` input samples).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CauchySchwarzViolation,
    DegenerateDenominator,
    IllConditioned,
    PreconditionError,
    RangeError,
    RegularityViolation,
    SingularMatrix,
)
from .spectral import (
    NEG_INFINITY,
    BandMask,
    DecimationModel,
    FirFilter,
    Spectrum,
    _cos_table,
    _same_grid,
    _sin_table,
    alias_matrix,
    apply_mask,
    apply_mask_cross,
    autocorr_from_psd,
    crosscorr_from_cross_psd,
    mean_log,
    paley_wiener_integral,
)

HALF_LN_2PI_E = 0.5 * math.log(2.0 * math.pi * math.e)

#: Output bins whose denominator falls below this fraction of its maximum
#: are treated as degenerate.
DEGENERATE_RTOL = 1e-13
#: Relative eigenvalue floor below which the polyphase matrix is singular.
SINGULAR_RTOL = 1e-12
#: Relative slack on the Cauchy-Schwarz inequality.
CS_RTOL = 1e-12
#: Maximum block length handled by the dense oracle.
ORACLE_BUDGET = 4096
#: Extra lags kept beyond twice the filter length in the oracle.
ORACLE_KMAX = 64


@dataclass(frozen=True)
class RateReport:
    """Information rates around the decimator and their difference."""

    mi_rate_input: float
    mi_rate_output: float
    relevant_loss: float

    @classmethod
    def from_rates(cls, mi_rate_input: float, mi_rate_output: float) -> RateReport:
        return cls(mi_rate_input, mi_rate_output, mi_rate_input - mi_rate_output)

    def as_dict(self) -> dict[str, float]:
        return {
            "mi_rate_input": self.mi_rate_input,
            "mi_rate_output": self.mi_rate_output,
            "relevant_loss": self.relevant_loss,
        }


# ---------------------------------------------------------------------------
# Entropy rates
# ---------------------------------------------------------------------------


def entropy_rate_gaussian(s: Spectrum) -> float:
    """Differential entropy rate of a stationary Gaussian process with PSD ``s``."""
    ml = mean_log(s.values)
    if ml == NEG_INFINITY:
        return NEG_INFINITY
    return HALF_LN_2PI_E + 0.5 * ml


def entropy_rate_through_filter(s: Spectrum, m: BandMask) -> float:
    """Entropy rate after filtering: input rate plus the mean log-magnitude of H."""
    _same_grid(s.grid, m.grid)
    h = entropy_rate_gaussian(s)
    pw = paley_wiener_integral(m)
    if h == NEG_INFINITY or pw == NEG_INFINITY:
        return NEG_INFINITY
    return h + pw


# ---------------------------------------------------------------------------
# Mutual information rates
# ---------------------------------------------------------------------------


def mi_rate_scalar(S_W: Spectrum, S_Z: Spectrum, S_WZ_sq: Spectrum) -> float:
    """Mutual information rate between jointly Gaussian processes W and Z.

    ``S_WZ_sq`` holds ``|S_WZ|^2`` per bin.  The rate is the grid average of
    ``-ln(1 - |rho|^2) / 2`` with the squared coherence
    ``|rho|^2 = |S_WZ|^2 / (S_W S_Z)``, taken as zero where the cross term is.
    """
    _same_grid(S_W.grid, S_Z.grid)
    _same_grid(S_W.grid, S_WZ_sq.grid)
    prod = S_W.values * S_Z.values
    cross = S_WZ_sq.values
    slack = CS_RTOL * max(1.0, float(np.max(prod)))
    bad = cross > prod + slack
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise CauchySchwarzViolation(f"|S_WZ|^2 exceeds S_W*S_Z at bin {k}")
    if not np.any(cross > 0.0):
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        rho2 = np.where(cross > 0.0, cross / np.where(prod > 0.0, prod, 1.0), 0.0)
    rho2 = np.minimum(rho2, 1.0)
    ml = mean_log(1.0 - rho2)
    if ml == NEG_INFINITY:
        return math.inf
    return max(0.0, -0.5 * ml)


def _mean_log_fixed(values: np.ndarray, degenerate: np.ndarray, what: str) -> float:
    """Mean of ``ln(values)`` where isolated degenerate bins take the average of
    their neighbours' integrand; wider degenerate regions are an error."""
    if not np.any(degenerate):
        return float(np.mean(np.log(values)))
    n = values.size
    runs = degenerate & (np.roll(degenerate, 1) | np.roll(degenerate, -1))
    if np.any(runs) or n < 3:
        k = int(np.flatnonzero(runs)[0]) if np.any(runs) else 0
        raise DegenerateDenominator(f"{what} vanishes on a band of output bins", bin_index=k)
    logs = np.log(np.where(degenerate, 1.0, values))
    idx = np.flatnonzero(degenerate)
    logs[idx] = 0.5 * (logs[(idx - 1) % n] + logs[(idx + 1) % n])
    return float(np.mean(logs))


def snr_rate_from_gains(ss: np.ndarray, sn: np.ndarray, gains: np.ndarray, M: int) -> float:
    """Blocked rate of an additive model for per-bin mask gains.

    Works on raw arrays so that optimizers can call it without building
    validated spectrum objects for every candidate.
    """
    num = alias_matrix(ss * gains, M).sum(axis=0)
    den = alias_matrix(sn * gains, M).sum(axis=0)
    top = float(np.max(den))
    if top <= 0.0:
        raise DegenerateDenominator("noise alias sum vanishes at every output bin", bin_index=0)
    degenerate = den <= DEGENERATE_RTOL * top
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = 1.0 + num / np.where(degenerate, 1.0, den)
    return 0.5 * _mean_log_fixed(ratio, degenerate, "noise alias sum")


def mi_rate_blocked_snr(model: DecimationModel, m: BandMask) -> float:
    """Blocked rate of an additive model through mask ``m`` via alias-summed SNR."""
    if not model.is_additive:
        raise PreconditionError("the SNR formula needs an additive model")
    _same_grid(model.grid, m.grid)
    return snr_rate_from_gains(
        model.signal_psd.values, model.noise_psd.values, m.gains, model.M
    )


def _alias_phases(n: int, M: int) -> np.ndarray:
    """E[j, k, l] = exp(1j * l * theta(i_k(j))) for every output bin j."""
    bins = alias_matrix(np.arange(n), M).T  # (J, M)
    l = np.arange(M)
    idx = (bins[:, :, None] * l[None, None, :]) % n
    return _cos_table(n)[idx] + 1j * _sin_table(n)[idx]


def _check_regularity(model: DecimationModel) -> None:
    ss = model.signal_psd.values
    sx = model.observation_psd.values
    reg = ss * sx - np.abs(model.cross.values) ** 2
    scale = max(1.0, float(np.max(ss * sx)))
    bad = reg <= SINGULAR_RTOL * scale
    if not np.any(bad):
        return
    if np.any(reg < -CS_RTOL * scale):
        k = int(np.argmin(reg))
        raise RegularityViolation("S_S*S_X - |S_SX|^2 is negative", bin_index=k)
    runs = bad & (np.roll(bad, 1) | np.roll(bad, -1))
    if np.any(runs):
        k = int(np.flatnonzero(runs)[0])
        raise RegularityViolation("S_S*S_X - |S_SX|^2 vanishes on a band", bin_index=k)


def mi_rate_blocked_matrix(model: DecimationModel, m: BandMask) -> float:
    """Blocked rate through mask ``m`` from the polyphase covariance matrices.

    Per output frequency the integrand is ``ln(S_Y det A_S / det A_SY)``, where
    ``A_S`` is the polyphase covariance of one block of the signal, ``s_Y`` its
    cross covariance with the output and ``det A_SY`` follows from the
    bordered-determinant expansion ``S_Y det A_S - s_Y^H adj(A_S) s_Y``.
    The filter is taken real and nonnegative, ``H = sqrt(gains)``.
    """
    _same_grid(model.grid, m.grid)
    _check_regularity(model)
    M = model.M
    n = model.grid.n_points
    E = _alias_phases(n, M)  # (J, k, l)
    ss = alias_matrix(model.signal_psd.values, M).T  # (J, k)
    sx = alias_matrix(model.observation_psd.values, M).T
    g = alias_matrix(m.gains, M).T
    cross_h = alias_matrix(model.cross.values * np.sqrt(m.gains), M).T

    # A[j, l, m] = (1/M) sum_k S_S e^{j theta_k (l - m)}
    A = np.einsum("jk,jkl,jkm->jlm", ss, E, np.conj(E)) / M
    A = 0.5 * (A + np.conj(np.swapaxes(A, 1, 2)))
    s = np.einsum("jk,jkl->jl", cross_h, E) / M
    S_Y = np.sum(sx * g, axis=1) / M

    eig = np.linalg.eigvalsh(A)  # ascending
    lam_max = eig[:, -1]
    if np.any(lam_max <= 0.0):
        j = int(np.flatnonzero(lam_max <= 0.0)[0])
        raise SingularMatrix("polyphase signal matrix vanishes", bin_index=j)
    singular = eig[:, 0] <= SINGULAR_RTOL * lam_max

    q = np.empty(S_Y.shape)
    regular = ~singular
    if np.any(regular):
        Ar, sr = A[regular], s[regular]
        det = np.real(np.linalg.det(Ar))
        x = np.linalg.solve(Ar, sr[..., None])[..., 0]
        adj_s = det[:, None] * x
        # det A_SY / det A_S  =  S_Y - s^H adj(A_S) s / det A_S
        quad = np.real(np.einsum("jl,jl->j", np.conj(sr), adj_s))
        q[regular] = quad / det
    for j in np.flatnonzero(singular):
        q[j] = _pinv_quadratic(A[j], s[j], j)

    den = S_Y - q
    top = float(np.max(S_Y))
    if top <= 0.0:
        raise DegenerateDenominator("output spectrum vanishes at every bin", bin_index=0)
    degenerate = den <= DEGENERATE_RTOL * top
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = S_Y / np.where(degenerate, 1.0, den)
    return 0.5 * _mean_log_fixed(ratio, degenerate, "det A_SY")


def _pinv_quadratic(A: np.ndarray, s: np.ndarray, j: int) -> float:
    """s^H A^+ s for a rank-deficient Hermitian A, requiring s in range(A)."""
    w, V = np.linalg.eigh(A)
    keep = w > SINGULAR_RTOL * w[-1]
    coeff = np.conj(V.T) @ s
    outside = np.linalg.norm(coeff[~keep])
    if outside > 1e-9 * max(1.0, float(np.linalg.norm(s))):
        raise SingularMatrix(
            "polyphase signal matrix is singular and the cross vector leaves its range",
            bin_index=int(j),
        )
    return float(np.sum(np.abs(coeff[keep]) ** 2 / w[keep]))


def mi_rate_blocked(model: DecimationModel, m: BandMask) -> float:
    """Blocked rate using the SNR form for additive models, the matrix form otherwise."""
    if model.is_additive:
        return mi_rate_blocked_snr(model, m)
    return mi_rate_blocked_matrix(model, m)


def input_rate(model: DecimationModel) -> float:
    """Information per block of M input samples, ``M * I(S; X)``."""
    return model.M * mi_rate_scalar(
        model.signal_psd, model.observation_psd, model.cross.magnitude_squared()
    )


def relevant_loss_rate(model: DecimationModel, m: BandMask) -> RateReport:
    """Relevant information lost by filtering with ``m`` and downsampling."""
    return RateReport.from_rates(input_rate(model), mi_rate_blocked(model, m))


# ---------------------------------------------------------------------------
# Finite-window oracle
# ---------------------------------------------------------------------------


def _toeplitz_from(r: np.ndarray, size: int, stride: int = 1) -> np.ndarray:
    """T[a, b] = r[|a - b| * stride] with r zero beyond its length."""
    lag = np.abs(np.subtract.outer(np.arange(size), np.arange(size))) * stride
    out = np.zeros((size, size))
    inside = lag < r.size
    out[inside] = r[lag[inside]]
    return out


def _logdet_chol(mat: np.ndarray, what: str) -> float:
    scale = float(np.mean(np.diag(mat))) or 1.0
    for jitter in (0.0, 1e-12, 1e-10):
        try:
            L = np.linalg.cholesky(mat + jitter * scale * np.eye(mat.shape[0]))
        except np.linalg.LinAlgError:
            continue
        return 2.0 * float(np.sum(np.log(np.diag(L))))
    raise IllConditioned(f"Cholesky factorization of {what} failed", regularization=1e-10 * scale)


def mi_oracle_finite_n(model: DecimationModel, h: FirFilter | BandMask, n: int) -> float:
    """I(S_1..S_{nM}; Y_1..Y_n) / n from explicit joint covariance matrices.

    For an FIR filter the covariances are assembled in the time domain from
    the autocorrelation sequences, truncated beyond lag
    ``2 * len(h) + 64``.  A mask is handled through the autocorrelations of
    the filtered spectra themselves.
    """
    M = model.M
    if n < 1 or n * M > ORACLE_BUDGET:
        raise RangeError(f"need 1 <= n*M <= {ORACLE_BUDGET}, got n={n}, M={M}")
    size_s = n * M
    if isinstance(h, BandMask):
        _same_grid(model.grid, h.grid)
        max_lag = size_s
        if max_lag >= model.grid.n_points / 2:
            raise RangeError("window too long for the grid; use a finer grid")
        r_y_full = autocorr_from_psd(apply_mask(model.observation_psd, h), max_lag)
        r_y = r_y_full[::M]
        lags = np.arange(-max_lag, max_lag + 1)
        c = crosscorr_from_cross_psd(apply_mask_cross(model.cross, h), lags)
        offset = max_lag
    else:
        taps = h.coeffs
        P = taps.size - 1
        trunc = min(2 * taps.size + ORACLE_KMAX, model.grid.n_points // 2 - 1)
        r_x = autocorr_from_psd(model.observation_psd, trunc)
        # filtered autocorrelation: sum_{p,q} h_p h_q r_x[l - p + q]
        span = (n - 1) * M
        r_y = np.zeros(n)
        for b in range(n):
            lag0 = b * M
            acc = 0.0
            for p in range(P + 1):
                for q in range(P + 1):
                    lag = abs(lag0 - p + q)
                    if lag <= trunc:
                        acc += taps[p] * taps[q] * r_x[lag]
            r_y[b] = acc
            if lag0 - 2 * P > trunc:
                break
        lags = np.arange(-trunc, trunc + 1)
        R = crosscorr_from_cross_psd(model.cross, lags)
        # c[m] = sum_p h_p R[m + p] for |m| <= span + P
        offset = span + size_s + P
        c = np.zeros(2 * offset + 1)
        for p in range(P + 1):
            for i, lag in enumerate(lags):
                m = lag - p
                if -offset <= m <= offset:
                    c[m + offset] += taps[p] * R[i]
    r_s_full = autocorr_from_psd(model.signal_psd, min(size_s, model.grid.n_points // 2 - 1))
    sig_ss = _toeplitz_from(r_s_full, size_s)
    sig_yy = _toeplitz_from(r_y, n)
    i = np.arange(size_s)[:, None]
    b = np.arange(n)[None, :]
    d = i - b * M + offset
    sig_sy = np.where((d >= 0) & (d < c.size), c[np.clip(d, 0, c.size - 1)], 0.0)
    joint = np.block([[sig_ss, sig_sy], [sig_sy.T, sig_yy]])
    ld_s = _logdet_chol(sig_ss, "Sigma_SS")
    ld_y = _logdet_chol(sig_yy, "Sigma_YY")
    ld_j = _logdet_chol(joint, "joint covariance")
    return 0.5 * (ld_s + ld_y - ld_j) / n

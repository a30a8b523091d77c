"""FIR anti-aliasing filter design against the Gaussian-bound loss.

The objective is the relevant information loss rate computed as if the signal
were Gaussian, which upper-bounds the loss for any signal with the same PSD in
additive Gaussian noise.  Filters are normalized to ``h[0] = 1``; the
objective does not depend on the overall scale of ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import toeplitz

from .errors import PreconditionError, RangeError
from .inforate import input_rate, mi_rate_blocked_snr, snr_rate_from_gains
from .spectral import (
    BandMask,
    DecimationModel,
    FirFilter,
    Spectrum,
    _cos_table,
    alias_matrix,
    autocorr_from_psd,
    fir_magnitude_squared,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
NYQUIST_TOL = 1e-9
MAX_ORDER = 8


def _model_for(model: DecimationModel, M: int | None) -> DecimationModel:
    if not model.is_additive:
        raise PreconditionError("the Gaussian bound needs an additive model")
    if M is None or M == model.M:
        return model
    return DecimationModel.additive(model.signal_psd, model.noise_psd, M)


def gaussian_bound_loss(
    coeffs: FirFilter | Sequence[float], model: DecimationModel, M: int | None = None
) -> float:
    """Input information minus retained information for FIR filter ``coeffs``."""
    model = _model_for(model, M)
    h = coeffs if isinstance(coeffs, FirFilter) else FirFilter(coeffs)
    mask = fir_magnitude_squared(h, model.grid)
    return input_rate(model) - mi_rate_blocked_snr(model, mask)


class _BoundObjective:
    """Loss as a function of ``c = h[1:]`` with ``h[0] = 1``, sharing the alias
    core with the library rate and reusing precomputed cosine rows."""

    def __init__(self, model: DecimationModel, order: int) -> None:
        n = model.grid.n_points
        table = _cos_table(n)
        k = np.arange(n)
        self._rows = [table[(m * k) % n] for m in range(order + 1)]
        self._n = n
        self._ss = model.signal_psd.values
        self._sn = model.noise_psd.values
        self._M = model.M
        self._input = input_rate(model)
        self.evals = 0

    def __call__(self, c: np.ndarray) -> float:
        self.evals += 1
        h = np.concatenate([[1.0], c])
        rho = np.correlate(h, h, mode="full")[h.size - 1 :]
        acc = np.full(self._n, rho[0])
        for m in range(1, rho.size):
            if rho[m] != 0.0:
                acc += (2.0 * rho[m]) * self._rows[m]
        gains = np.maximum(acc, 0.0)
        return self._input - snr_rate_from_gains(self._ss, self._sn, gains, self._M)


@dataclass(frozen=True)
class OptimizerOptions:
    grid_min: float = -4.0
    grid_max: float = 4.0
    grid_step: float = 0.05
    tol: float = 1e-10
    max_cycles: int = 50
    golden_xtol: float = 1e-9
    golden_max_iter: int = 200
    record_history: bool = False

    def coarse_grid(self) -> np.ndarray:
        count = int(round((self.grid_max - self.grid_min) / self.grid_step)) + 1
        return self.grid_min + self.grid_step * np.arange(count)


@dataclass(frozen=True, eq=False)
class FirDesignResult:
    coeffs: FirFilter
    loss: float
    objective_evals: int
    converged: bool
    cycles: int = 0
    history: tuple[tuple[tuple[float, ...], float], ...] | None = field(default=None, repr=False)


def _golden_min(f, a: float, b: float, xtol: float, max_iter: int) -> tuple[float, float]:
    """Golden-section search for a minimum of ``f`` on ``[a, b]``."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def optimize_fir(
    order: int,
    model: DecimationModel,
    M: int | None = None,
    options: OptimizerOptions | None = None,
) -> FirDesignResult:
    """Coordinate search over ``h[1..P]`` with ``h[0] = 1``.

    Each cycle visits the coordinates in order; every coordinate gets a
    coarse scan followed by golden-section refinement around the best grid
    point.  Cycling stops once a full cycle improves the loss by less than
    ``options.tol``.  The best point ever evaluated is returned.
    """
    if not 1 <= order <= MAX_ORDER:
        raise RangeError(f"order must lie in [1, {MAX_ORDER}], got {order}")
    model = _model_for(model, M)
    opts = options or OptimizerOptions()
    objective = _BoundObjective(model, order)
    history: list[tuple[tuple[float, ...], float]] | None = [] if opts.record_history else None
    best_c = np.zeros(order)
    best_loss = math.inf

    def evaluate(c: np.ndarray) -> float:
        nonlocal best_c, best_loss
        value = objective(c)
        if history is not None:
            history.append((tuple(float(x) for x in c), value))
        if value < best_loss:
            best_loss, best_c = value, c.copy()
        return value

    current = np.zeros(order)
    current_loss = evaluate(current)
    grid = opts.coarse_grid()
    converged = False
    cycles = 0
    for cycles in range(1, opts.max_cycles + 1):
        start_loss = current_loss
        for i in range(order):
            def along(t: float, i: int = i) -> float:
                trial = current.copy()
                trial[i] = t
                return evaluate(trial)

            scan = [along(float(t)) for t in grid]
            t0 = float(grid[int(np.argmin(scan))])
            t_ref, f_ref = _golden_min(
                along, t0 - opts.grid_step, t0 + opts.grid_step, opts.golden_xtol, opts.golden_max_iter
            )
            if f_ref < current_loss:
                current[i], current_loss = t_ref, f_ref
            if min(scan) < current_loss:
                current[i], current_loss = t0, min(scan)
        if start_loss - current_loss < opts.tol:
            converged = True
            break
    return FirDesignResult(
        coeffs=FirFilter(np.concatenate([[1.0], best_c])),
        loss=best_loss,
        objective_evals=objective.evals,
        converged=converged,
        cycles=cycles,
        history=tuple(history) if history is not None else None,
    )


# ---------------------------------------------------------------------------
# Eigenvector design
# ---------------------------------------------------------------------------


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors in the columns,
    in the order produced by the sweeps (not sorted).
    """
    a = np.array(A, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(a**2) - np.sum(np.diag(a) ** 2)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    return np.diag(a).copy(), v


def eigen_compaction(S_X: Spectrum, num_taps: int, M: int) -> FirFilter:
    """Unit-norm dominant eigenvector of the ``num_taps`` autocorrelation matrix."""
    if not 1 <= num_taps <= M:
        raise RangeError(f"num_taps must lie in [1, M={M}], got {num_taps}")
    r = autocorr_from_psd(S_X, num_taps - 1)
    w, v = jacobi_eigh(toeplitz(r))
    x = v[:, int(np.argmax(w))]
    x = x / np.linalg.norm(x)
    lead = np.flatnonzero(np.abs(x) > 1e-15)
    if lead.size and x[lead[0]] < 0:
        x = -x
    return FirFilter(x)


# ---------------------------------------------------------------------------
# Nyquist-M condition and the Jensen bound
# ---------------------------------------------------------------------------


class NyquistCheck(NamedTuple):
    satisfied: bool
    max_deviation: float


def nyquist_m_check(m: BandMask, M: int) -> NyquistCheck:
    """Is the alias sum ``(1/M) sum_k |H(theta_k)|^2`` equal to one everywhere?"""
    alias_sum = alias_matrix(m.gains, M).sum(axis=0) / M
    dev = float(np.max(np.abs(alias_sum - 1.0)))
    return NyquistCheck(dev < NYQUIST_TOL, dev)


def jensen_upper_bound(S_S: Spectrum, sigma_n_sq: float, m: BandMask, M: int) -> float:
    """``0.5 ln(1 + var(filtered signal) / sigma^2)`` for white noise and a
    Nyquist-M filter; never below the exact blocked rate."""
    check = nyquist_m_check(m, M)
    if not check.satisfied:
        raise PreconditionError(
            f"mask violates the Nyquist-{M} condition (deviation {check.max_deviation:.3e})"
        )
    if sigma_n_sq <= 0:
        raise RangeError("noise variance must be positive")
    var = float(np.mean(S_S.values * m.gains))
    return 0.5 * math.log1p(var / sigma_n_sq)

"""Information rates, loss rates and anti-aliasing filter design for
decimation systems driven by stationary Gaussian processes."""

from __future__ import annotations

from .compaction import (
    CompactionResult,
    compaction_mask,
    ideal_lowpass_mask,
    snr_ratio,
    theorem2_ratio,
)
from .errors import *  # noqa: F401,F403
from .fir_design import (
    FirDesignResult,
    OptimizerOptions,
    eigen_compaction,
    gaussian_bound_loss,
    jensen_upper_bound,
    nyquist_m_check,
    optimize_fir,
)
from .inforate import (
    RateReport,
    entropy_rate_gaussian,
    entropy_rate_through_filter,
    mi_oracle_finite_n,
    mi_rate_blocked,
    mi_rate_blocked_matrix,
    mi_rate_blocked_snr,
    mi_rate_scalar,
    relevant_loss_rate,
)
from .relative_loss import (
    RationalBandMask,
    RelativeLossResult,
    irrational_edge_bounds,
    relative_loss_rate,
    subband_groups,
)
from .simulate import SampleRecord, decimate, empirical_check, synthesize_gaussian, welch_psd
from .spectral import (
    NEG_INFINITY,
    BandMask,
    CrossSpectrum,
    DecimationModel,
    FirFilter,
    FrequencyGrid,
    Spectrum,
    alias_bins,
    apply_mask,
    apply_mask_cross,
    autocorr_from_psd,
    downsampled_psd,
    fir_magnitude_squared,
    integrate,
    make_grid,
    noise_gain,
    paley_wiener_integral,
    psd_from_autocorr,
)

__version__ = "0.1.0"

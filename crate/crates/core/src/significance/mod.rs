//! AR(1) red-noise null for wavelet power.
//!
//! Thresholds follow the chi-square-on-background-spectrum test: at each
//! scale the expected power under the null is the series variance times
//! the normalised AR(1) spectrum at the scale's equivalent Fourier
//! frequency, and the wavelet power is distributed as that mean times
//! χ²_ν/ν. For a complex wavelet ν = 2. At the few smallest scales the
//! sampled wavelet reaches past the Nyquist frequency, its coefficients are
//! no longer circular, and ν is lowered to the effective value implied by
//! the filter (see [`effective_dof`]).

mod ar1;
mod mask;
mod thresholds;

pub use ar1::{fit_ar1, rednoise_spectrum, Ar1Model, MIN_FIT_LEN};
pub use mask::{significance_mask, MaskSummary, SignificanceResult};
pub use thresholds::{
    effective_dof, monte_carlo_thresholds, significance_thresholds, NullMethod, Thresholds,
    MIN_MC_RUNS,
};

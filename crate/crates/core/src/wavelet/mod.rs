//! Morlet continuous wavelet transform and the quantities derived from it.
//!
//! The forward transform follows the usual frequency-domain recipe: remove
//! the mean, zero-pad, multiply by the scale-normalised Fourier form of the
//! wavelet and invert. [`cwt_direct`] evaluates the defining sum literally
//! and is kept as an independent check on the fast path.

mod grid;
mod inverse;
mod morlet;
mod spectrum;
mod transform;

pub use grid::{build_scale_grid, ScaleGrid};
pub use inverse::inverse_cwt;
pub use morlet::{
    admissibility_constant, admissibility_integrand, morlet_fourier, morlet_mother, MorletParams,
    WaveletBasis, PI_QUARTER_INV,
};
pub use spectrum::{cone_of_influence, energy, power, EnergyBudget, PowerSpectrum};
pub use transform::{cwt, cwt_direct, padded_length, CwtPlan, WaveletTransform, DIRECT_MAX_LEN};

/// Shortest series any transform accepts.
pub const MIN_SERIES_LEN: usize = 8;

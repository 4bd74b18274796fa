//! Continuous wavelet power spectra for daily return series.
//!
//! The crate computes Morlet wavelet transforms of evenly spaced series,
//! turns them into power spectra with a cone of influence, and tests each
//! cell against an AR(1) red-noise background. Supporting modules ingest
//! OHLC price files, generate synthetic calibration series, render
//! heatmaps and write the on-disk artifact set produced by the CLI.
//!
//! ```no_run
//! use cwt_spectra::prelude::*;
//!
//! # fn main() -> cwt_spectra::Result<()> {
//! let series = gen_ar1(2048, 0.3, 1.0, 7)?;
//! let params = MorletParams::default();
//! let grid = build_scale_grid(series.len(), 1.0, 2.0, 1.0 / 12.0)?;
//! let spectrum = power(&cwt(&series, &grid, &params)?);
//! let model = fit_ar1(&series)?;
//! let thresholds = significance_thresholds(&model, &grid, &params, 0.95)?;
//! let result = significance_mask(&spectrum, &thresholds)?;
//! println!("{:.1}% significant", 100.0 * result.significant_fraction());
//! # Ok(())
//! # }
//! ```

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN
// is rejected along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod data;
mod error;
pub mod matrix;
pub mod pipeline;
pub mod render;
pub mod selftest;
pub mod significance;
pub mod synthetic;
pub mod wavelet;

pub use error::{Error, ErrorKind, Result};
pub use matrix::Matrix;

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod prelude {
    pub use crate::data::{
        fetch_csv, log_returns, parse_ohlc_csv, ColumnSchema, OhlcRecord, ReturnSeries,
    };
    pub use crate::significance::{
        fit_ar1, monte_carlo_thresholds, rednoise_spectrum, significance_mask,
        significance_thresholds, Ar1Model, NullMethod, SignificanceResult, Thresholds,
    };
    pub use crate::synthetic::{gen_ar1, gen_burst_series, BurstSeries, BurstSpec};
    pub use crate::wavelet::{
        admissibility_constant, build_scale_grid, cone_of_influence, cwt, cwt_direct, energy,
        inverse_cwt, morlet_fourier, morlet_mother, power, CwtPlan, EnergyBudget, MorletParams,
        PowerSpectrum, ScaleGrid, WaveletBasis, WaveletTransform,
    };
    pub use crate::{Error, Matrix, Result};
}

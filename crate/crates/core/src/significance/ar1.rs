use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::ReturnSeries;
use crate::{Error, Result};

/// Shortest series [`fit_ar1`] accepts.
pub const MIN_FIT_LEN: usize = 32;

/// Largest lag-1 coefficient a fit may return.
const PHI_CAP: f64 = 0.99;

/// x_t = φ·x_{t−1} + ε_t with Var ε = σ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    phi: f64,
    sigma2: f64,
    series_variance: f64,
}

impl Ar1Model {
    pub fn new(phi: f64, sigma2: f64) -> Result<Self> {
        if !(phi.abs() < 1.0) {
            return Err(Error::Significance(format!(
                "AR(1) coefficient must satisfy |phi| < 1, got {phi}"
            )));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Significance(format!(
                "innovation variance must be positive, got {sigma2}"
            )));
        }
        Ok(Self {
            phi,
            sigma2,
            series_variance: sigma2 / (1.0 - phi * phi),
        })
    }

    /// White noise with the given variance.
    pub fn white(variance: f64) -> Result<Self> {
        Self::new(0.0, variance)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Stationary variance σ² / (1 − φ²).
    pub fn series_variance(&self) -> f64 {
        self.series_variance
    }
}

/// Lag-1 autocorrelation clamped to [0, 0.99]; negative estimates fall back
/// to white noise. The innovation variance is chosen so that the model's
/// stationary variance equals the sample (population) variance.
pub fn fit_ar1(series: &ReturnSeries) -> Result<Ar1Model> {
    let x = series.values();
    if x.len() < MIN_FIT_LEN {
        return Err(Error::Significance(format!(
            "AR(1) fit needs at least {MIN_FIT_LEN} values, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mu) * (v - mu)).sum();
    if x.iter().all(|v| *v == x[0]) || !(ss > 0.0) || !ss.is_finite() {
        return Err(Error::Significance(
            "cannot fit AR(1) to a series with zero variance".into(),
        ));
    }
    let lag1: f64 = x.windows(2).map(|w| (w[0] - mu) * (w[1] - mu)).sum();
    let phi = (lag1 / ss).clamp(0.0, PHI_CAP);
    let variance = ss / n;
    Ar1Model::new(phi, variance * (1.0 - phi * phi))
}

/// Normalised AR(1) spectrum (1 − φ²) / (1 + φ² − 2φ·cos 2πf) at `frequency`
/// in cycles per sample; identically 1 for white noise.
pub fn rednoise_spectrum(model: &Ar1Model, frequency: f64) -> f64 {
    let phi = model.phi;
    (1.0 - phi * phi) / (1.0 + phi * phi - 2.0 * phi * (2.0 * PI * frequency).cos())
}

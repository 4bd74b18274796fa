use serde::{Deserialize, Serialize};

use super::{MorletParams, MIN_SERIES_LEN};
use crate::{Error, Result};

/// Fractional-dyadic scales s_j = s0 · 2^(j·dj), j = 0..=J, in units of dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    s0: f64,
    dj: f64,
    dt: f64,
    series_len: usize,
    scales: Vec<f64>,
}

/// Builds the grid with J = floor(log2(n·dt/s0)/dj), so the largest scale
/// does not exceed the series duration.
pub fn build_scale_grid(n: usize, dt: f64, s0: f64, dj: f64) -> Result<ScaleGrid> {
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: n,
            min: MIN_SERIES_LEN,
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(dj.is_finite() && dj > 0.0) {
        return Err(Error::InvalidParams(format!(
            "dj must be positive, got {dj}"
        )));
    }
    if !(s0.is_finite() && s0 >= 2.0 * dt) {
        return Err(Error::InvalidParams(format!(
            "smallest scale s0 = {s0} is below 2·dt = {} and would alias",
            2.0 * dt
        )));
    }
    let octaves = (n as f64 * dt / s0).log2();
    // Guard against log2 landing a hair under an exact integer.
    let j_max = (octaves / dj + 1e-9).floor();
    if j_max < 1.0 {
        return Err(Error::InvalidParams(format!(
            "grid needs at least two scales: n·dt = {} is too short for s0 = {s0}, dj = {dj}",
            n as f64 * dt
        )));
    }
    let scales = (0..=j_max as usize)
        .map(|j| s0 * (j as f64 * dj).exp2())
        .collect();
    Ok(ScaleGrid {
        s0,
        dj,
        dt,
        series_len: n,
        scales,
    })
}

impl ScaleGrid {
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn dj(&self) -> f64 {
        self.dj
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Series length the grid was built for.
    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn max_scale(&self) -> f64 {
        *self.scales.last().expect("grid has at least two scales")
    }

    /// Equivalent Fourier periods λ·s_j.
    pub fn periods(&self, params: &MorletParams) -> Vec<f64> {
        let lambda = params.fourier_factor();
        self.scales.iter().map(|s| lambda * s).collect()
    }

    /// Equivalent Fourier frequencies in cycles per sample, dt / (λ·s_j).
    pub fn frequencies(&self, params: &MorletParams) -> Vec<f64> {
        let lambda = params.fourier_factor();
        self.scales.iter().map(|s| self.dt / (lambda * s)).collect()
    }
}

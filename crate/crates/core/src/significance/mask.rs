use serde::{Deserialize, Serialize};

use super::{NullMethod, Thresholds};
use crate::wavelet::PowerSpectrum;
use crate::{Error, Matrix, Result};

/// Pointwise significance of a power spectrum against per-scale thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceResult {
    pub level: f64,
    pub thresholds: Vec<f64>,
    pub dof: Vec<f64>,
    /// `power[(t, j)] > thresholds[j]`, evaluated at every cell.
    pub mask: Matrix<bool>,
    /// Inside the cone of influence. Cells outside are still tested but
    /// their verdict is unreliable.
    pub reliable: Matrix<bool>,
    pub method: NullMethod,
    pub mc_runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSummary {
    pub significant: usize,
    pub reliable: usize,
    pub reliable_significant: usize,
    pub total: usize,
}

impl SignificanceResult {
    pub fn is_significant(&self, t: usize, j: usize) -> bool {
        self.mask[(t, j)]
    }

    pub fn summary(&self) -> MaskSummary {
        let mut s = MaskSummary {
            significant: 0,
            reliable: 0,
            reliable_significant: 0,
            total: self.mask.as_slice().len(),
        };
        for (m, r) in self.mask.iter().zip(self.reliable.iter()) {
            s.significant += *m as usize;
            s.reliable += *r as usize;
            s.reliable_significant += (*m && *r) as usize;
        }
        s
    }

    /// Fraction of all cells flagged significant.
    pub fn significant_fraction(&self) -> f64 {
        let s = self.summary();
        s.significant as f64 / s.total as f64
    }

    /// Fraction of inside-COI cells flagged significant.
    pub fn interior_significant_fraction(&self) -> f64 {
        let s = self.summary();
        if s.reliable == 0 {
            0.0
        } else {
            s.reliable_significant as f64 / s.reliable as f64
        }
    }
}

pub fn significance_mask(
    spectrum: &PowerSpectrum,
    thresholds: &Thresholds,
) -> Result<SignificanceResult> {
    if spectrum.n_scales() != thresholds.values.len() {
        return Err(Error::DimensionMismatch {
            spectrum: spectrum.n_scales(),
            thresholds: thresholds.values.len(),
        });
    }
    let cols = spectrum.n_scales();
    let power = spectrum.power();
    let data = power
        .indexed()
        .map(|((_, j), &p)| p > thresholds.values[j])
        .collect();
    Ok(SignificanceResult {
        level: thresholds.level,
        thresholds: thresholds.values.clone(),
        dof: thresholds.dof.clone(),
        mask: Matrix::from_vec(spectrum.n_times(), cols, data),
        reliable: spectrum.reliable_mask(),
        method: thresholds.method,
        mc_runs: thresholds.mc_runs,
    })
}

use chrono::NaiveDate;

use super::{MorletParams, ScaleGrid, WaveletBasis, WaveletTransform};
use crate::{Matrix, Result};

/// Wavelet power |W(u, s)|² with the cone of influence attached.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    power: Matrix<f64>,
    coi: Vec<f64>,
    grid: ScaleGrid,
    params: MorletParams,
    timestamps: Vec<NaiveDate>,
}

impl PowerSpectrum {
    /// Assembles a spectrum from stored parts, e.g. when reading artifacts.
    pub fn from_parts(
        power: Matrix<f64>,
        coi: Vec<f64>,
        grid: ScaleGrid,
        params: MorletParams,
        timestamps: Vec<NaiveDate>,
    ) -> Result<Self> {
        if power.rows() != coi.len() || power.cols() != grid.len() || timestamps.len() != coi.len()
        {
            return Err(crate::Error::Artifact(format!(
                "inconsistent spectrum parts: power {}x{}, coi {}, scales {}, dates {}",
                power.rows(),
                power.cols(),
                coi.len(),
                grid.len(),
                timestamps.len()
            )));
        }
        Ok(Self {
            power,
            coi,
            grid,
            params,
            timestamps,
        })
    }

    pub fn power(&self) -> &Matrix<f64> {
        &self.power
    }

    /// Largest reliable scale at each time index.
    pub fn coi(&self) -> &[f64] {
        &self.coi
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn params(&self) -> &MorletParams {
        &self.params
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn n_times(&self) -> usize {
        self.power.rows()
    }

    pub fn n_scales(&self) -> usize {
        self.power.cols()
    }

    /// True when cell (t, j) lies inside the cone of influence.
    pub fn is_reliable(&self, t: usize, j: usize) -> bool {
        self.grid.scales()[j] <= self.coi[t]
    }

    pub fn reliable_mask(&self) -> Matrix<bool> {
        let scales = self.grid.scales();
        let cols = scales.len();
        let data = self
            .coi
            .iter()
            .flat_map(|&c| scales.iter().map(move |&s| s <= c))
            .collect();
        Matrix::from_vec(self.coi.len(), cols, data)
    }

    /// Time-averaged power per scale over reliable cells only. Scales with
    /// no reliable cell yield `None`.
    pub fn interior_mean_per_scale(&self) -> Vec<Option<f64>> {
        (0..self.n_scales())
            .map(|j| {
                let (sum, count) = (0..self.n_times())
                    .filter(|&t| self.is_reliable(t, j))
                    .fold((0.0, 0usize), |(s, c), t| (s + self.power[(t, j)], c + 1));
                (count > 0).then(|| sum / count as f64)
            })
            .collect()
    }
}

/// Squared modulus of every coefficient, plus the cone of influence.
pub fn power(transform: &WaveletTransform) -> PowerSpectrum {
    let grid = transform.grid();
    PowerSpectrum {
        power: transform.coefficients().map(|c| c.norm_sqr()),
        coi: cone_of_influence(transform.series_len(), grid.dt(), transform.params()),
        grid: grid.clone(),
        params: *transform.params(),
        timestamps: transform.timestamps().to_vec(),
    }
}

/// Maximum reliable scale at each time index: the distance to the nearer
/// edge divided by the wavelet's e-folding factor (√2 for Morlet).
pub fn cone_of_influence(n: usize, dt: f64, params: &MorletParams) -> Vec<f64> {
    let ef = params.efolding_factor();
    (0..n)
        .map(|t| {
            let d = t.min(n - 1 - t) as f64;
            d * dt / ef
        })
        .collect()
}

/// Wavelet-domain energy next to the plain series energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBudget {
    /// (dj·dt / C_δ) · Σ_t Σ_j |W|² / s_j
    pub wavelet: f64,
    /// Σ_t (x_t − mean)²
    pub series: f64,
}

impl EnergyBudget {
    pub fn ratio(&self) -> f64 {
        self.wavelet / self.series
    }
}

/// Discretised energy integral of the transform, next to the energy of the
/// mean-removed input recorded at transform time.
pub fn energy(transform: &WaveletTransform) -> Result<EnergyBudget> {
    let basis = WaveletBasis::new(*transform.params())?;
    let grid = transform.grid();
    let c = transform.coefficients();
    let scales = grid.scales();
    let mut sum = 0.0;
    for t in 0..c.rows() {
        for (j, &s) in scales.iter().enumerate() {
            sum += c[(t, j)].norm_sqr() / s;
        }
    }
    let wavelet = grid.dj() * grid.dt() / basis.delta_constant() * sum;
    Ok(EnergyBudget {
        wavelet,
        series: transform.series_energy(),
    })
}

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{rednoise_spectrum, Ar1Model};
use crate::synthetic::{ar1_values, derive_seed};
use crate::wavelet::{cone_of_influence, morlet_fourier, CwtPlan, MorletParams, ScaleGrid};
use crate::{Error, Result};

/// Fewest surrogate runs accepted for a Monte Carlo null.
pub const MIN_MC_RUNS: usize = 300;

/// Frequency samples used to evaluate the effective degrees of freedom.
const DOF_GRID: usize = 8192;

/// Histogram layout for the pooled Monte Carlo quantile, in log10 of power
/// relative to the model variance.
const HIST_LOG_MIN: f64 = -14.0;
const HIST_LOG_MAX: f64 = 6.0;
const HIST_BINS_PER_DECADE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullMethod {
    Analytic,
    MonteCarlo,
}

impl std::fmt::Display for NullMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NullMethod::Analytic => "analytic",
            NullMethod::MonteCarlo => "monte-carlo",
        })
    }
}

/// Per-scale power thresholds at one confidence level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub level: f64,
    pub values: Vec<f64>,
    /// Degrees of freedom used per scale (analytic) or implied by the
    /// filter (Monte Carlo, informational).
    pub dof: Vec<f64>,
    pub method: NullMethod,
    pub mc_runs: usize,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Significance(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}

/// Effective degrees of freedom of |W|² at one scale under the model.
///
/// With W = a + ib, a Satterthwaite match of |W|² to c·χ²_ν gives
/// ν = 2A² / (A² + B²), where A = Σ S(ω)|F(ω)|² and B = Σ S(ω)F(ω)F(−ω)
/// over the periodised filter F. B vanishes when the filter has no
/// negative-frequency support, giving ν = 2.
pub fn effective_dof(model: &Ar1Model, scale: f64, dt: f64, params: &MorletParams) -> f64 {
    let fold = 2.0 * PI / dt;
    let filter = |omega: f64| {
        let mut acc = 0.0;
        let mut m = 0.0;
        loop {
            let x = scale * (omega + m * fold);
            if x - params.omega0() > 40.0 {
                break;
            }
            acc += morlet_fourier(x, params);
            m += 1.0;
        }
        acc
    };
    let values: Vec<f64> = (0..DOF_GRID)
        .map(|k| filter(k as f64 * fold / DOF_GRID as f64))
        .collect();
    let (mut a, mut b) = (0.0, 0.0);
    for k in 0..DOF_GRID {
        let f = k.min(DOF_GRID - k) as f64 / DOF_GRID as f64;
        let s = rednoise_spectrum(model, f);
        let pos = values[k];
        let neg = values[(DOF_GRID - k) % DOF_GRID];
        a += s * pos * pos;
        b += s * pos * neg;
    }
    if a <= 0.0 {
        return 2.0;
    }
    2.0 * a * a / (a * a + b * b)
}

fn chi_square_quantile(dof: f64, level: f64) -> Result<f64> {
    if dof == 2.0 {
        // Exact for the common case.
        return Ok(-2.0 * (1.0 - level).ln());
    }
    let dist = ChiSquared::new(dof)
        .map_err(|e| Error::Significance(format!("chi-square with {dof} dof: {e}")))?;
    Ok(dist.inverse_cdf(level))
}

/// Analytic thresholds: series_variance · P(f_j) · χ²_ν(level) / ν with
/// f_j = dt / (λ·s_j).
pub fn significance_thresholds(
    model: &Ar1Model,
    grid: &ScaleGrid,
    params: &MorletParams,
    level: f64,
) -> Result<Thresholds> {
    check_level(level)?;
    let freqs = grid.frequencies(params);
    let dof: Vec<f64> = grid
        .scales()
        .iter()
        .map(|&s| {
            let nu = effective_dof(model, s, grid.dt(), params);
            // Treat rounding-level departures from a circular coefficient as 2.
            if (2.0 - nu) < 1e-9 {
                2.0
            } else {
                nu
            }
        })
        .collect();
    let values = freqs
        .iter()
        .zip(&dof)
        .map(|(&f, &nu)| {
            let q = chi_square_quantile(nu, level)?;
            Ok(model.series_variance() * rednoise_spectrum(model, f) * q / nu)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Invariant(format!("non-positive threshold {bad}")));
    }
    Ok(Thresholds {
        level,
        values,
        dof,
        method: NullMethod::Analytic,
        mc_runs: 0,
    })
}

struct PowerHistogram {
    scales: usize,
    bins: usize,
    counts: Vec<u64>,
}

impl PowerHistogram {
    fn new(scales: usize) -> Self {
        let bins = ((HIST_LOG_MAX - HIST_LOG_MIN) * HIST_BINS_PER_DECADE) as usize;
        Self {
            scales,
            bins,
            counts: vec![0; scales * bins],
        }
    }

    fn add(&mut self, j: usize, relative_power: f64) {
        let pos = (relative_power.log10() - HIST_LOG_MIN) * HIST_BINS_PER_DECADE;
        // Zero or underflowing power lands in the first bin.
        let b = if pos.is_finite() && pos > 0.0 {
            (pos as usize).min(self.bins - 1)
        } else {
            0
        };
        self.counts[j * self.bins + b] += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }

    /// Level-quantile at scale `j`, interpolated linearly in log space
    /// within the bin that crosses the target rank.
    fn quantile(&self, j: usize, level: f64) -> Option<f64> {
        let row = &self.counts[j * self.bins..(j + 1) * self.bins];
        let total: u64 = row.iter().sum();
        if total == 0 {
            return None;
        }
        let target = level * total as f64;
        let mut below = 0.0;
        for (b, &c) in row.iter().enumerate() {
            let c = c as f64;
            if c > 0.0 && below + c >= target {
                let frac = ((target - below) / c).clamp(0.0, 1.0);
                let log = HIST_LOG_MIN + (b as f64 + frac) / HIST_BINS_PER_DECADE;
                return Some(10f64.powf(log));
            }
            below += c;
        }
        Some(10f64.powf(HIST_LOG_MAX))
    }
}

/// Empirical thresholds from `runs` simulated AR(1) series of the grid's
/// length. Power at each scale is pooled over inside-COI time points (all
/// time points for scales with none) into a fine log histogram whose
/// integer counts merge identically regardless of thread scheduling. Run
/// `i` draws from a generator seeded by `derive_seed(seed, i)`.
pub fn monte_carlo_thresholds(
    model: &Ar1Model,
    grid: &ScaleGrid,
    params: &MorletParams,
    level: f64,
    runs: usize,
    seed: u64,
) -> Result<Thresholds> {
    check_level(level)?;
    if runs < MIN_MC_RUNS {
        return Err(Error::Significance(format!(
            "Monte Carlo null needs at least {MIN_MC_RUNS} runs, got {runs}"
        )));
    }
    let plan = CwtPlan::new(grid, params)?;
    let n = grid.series_len();
    let coi = cone_of_influence(n, grid.dt(), params);
    let scales = grid.scales();
    let pooled: Vec<Vec<usize>> = scales
        .iter()
        .map(|&s| {
            let inside: Vec<usize> = (0..n).filter(|&t| s <= coi[t]).collect();
            if inside.is_empty() {
                (0..n).collect()
            } else {
                inside
            }
        })
        .collect();
    let variance = model.series_variance();
    let sigma = model.sigma2().sqrt();

    let hist = (0..runs)
        .into_par_iter()
        .try_fold(
            || PowerHistogram::new(scales.len()),
            |mut hist, i| -> Result<PowerHistogram> {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                let x = ar1_values(n, model.phi(), sigma, &mut rng);
                for (j, column) in plan.power_columns_serial(&x)?.iter().enumerate() {
                    for &t in &pooled[j] {
                        hist.add(j, column[t] / variance);
                    }
                }
                Ok(hist)
            },
        )
        .try_reduce(|| PowerHistogram::new(scales.len()), |a, b| Ok(a.merge(b)))?;

    let values = (0..scales.len())
        .map(|j| {
            hist.quantile(j, level)
                .map(|q| q * variance)
                .ok_or_else(|| Error::Invariant(format!("no Monte Carlo samples at scale {j}")))
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(hist.scales, scales.len());
    let dof = scales
        .iter()
        .map(|&s| effective_dof(model, s, grid.dt(), params))
        .collect();
    Ok(Thresholds {
        level,
        values,
        dof,
        method: NullMethod::MonteCarlo,
        mc_runs: runs,
    })
}

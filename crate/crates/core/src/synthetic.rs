//! Synthetic series with known spectral structure: AR(1) red noise and
//! AR(1) baselines carrying a band-limited variance burst.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::data::ReturnSeries;
use crate::significance::Ar1Model;
use crate::wavelet::{MorletParams, ScaleGrid};
use crate::{Error, Matrix, Result};

/// Shortest series the generators produce.
pub const MIN_GEN_LEN: usize = 32;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream seed for item `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Samples discarded before the returned stretch starts.
fn burn_in(phi: f64) -> usize {
    (10.0 / (1.0 - phi)).ceil() as usize
}

pub(crate) fn ar1_values<R: Rng>(n: usize, phi: f64, sigma: f64, rng: &mut R) -> Vec<f64> {
    let burn = burn_in(phi);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..burn + n {
        let e: f64 = rng.sample(StandardNormal);
        x = phi * x + sigma * e;
        if i >= burn {
            out.push(x);
        }
    }
    out
}

/// x_t = φ·x_{t−1} + ε_t with Gaussian innovations of standard deviation
/// `sigma`, after a burn-in of ⌈10/(1−φ)⌉ samples. Dated on the weekday
/// calendar of [`crate::data::trading_days`].
pub fn gen_ar1(n: usize, phi: f64, sigma: f64, seed: u64) -> Result<ReturnSeries> {
    if !(phi.abs() < 1.0) {
        return Err(Error::Synthetic(format!("nonstationary phi = {phi}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Synthetic(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if n < MIN_GEN_LEN {
        return Err(Error::Synthetic(format!(
            "length must be at least {MIN_GEN_LEN}, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ReturnSeries::from_values(ar1_values(n, phi, sigma, &mut rng), "AR1")
}

/// A window `[start, end)` of extra variance confined to Fourier periods
/// within `[min_period, max_period]` (in samples).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstSpec {
    pub start: usize,
    pub end: usize,
    pub min_period: f64,
    pub max_period: f64,
    /// Standard deviation inside the window relative to the baseline's.
    pub amplitude_ratio: f64,
}

impl BurstSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Synthetic(m));
        if !(self.start < self.end && self.end <= n) {
            return bad(format!(
                "burst window [{}, {}) must be non-empty and within [0, {n}]",
                self.start, self.end
            ));
        }
        if !(self.min_period >= 2.0 && self.max_period > self.min_period) {
            return bad(format!(
                "period band [{}, {}] needs 2 <= min < max",
                self.min_period, self.max_period
            ));
        }
        if !(self.amplitude_ratio.is_finite() && self.amplitude_ratio >= 1.0) {
            return bad(format!(
                "amplitude ratio must be >= 1, got {}",
                self.amplitude_ratio
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    /// Standard deviation of the added noise relative to the baseline's, so
    /// that the total inside the window is `amplitude_ratio` times the
    /// baseline (independent components add in variance).
    pub fn added_std_ratio(&self) -> f64 {
        (self.amplitude_ratio * self.amplitude_ratio - 1.0)
            .max(0.0)
            .sqrt()
    }
}

/// A generated burst series with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstSeries {
    pub series: ReturnSeries,
    pub spec: BurstSpec,
}

impl BurstSeries {
    pub fn time_mask(&self) -> Vec<bool> {
        (0..self.series.len())
            .map(|t| (self.spec.start..self.spec.end).contains(&t))
            .collect()
    }

    /// Scales whose equivalent Fourier period λ·s lies inside the band.
    pub fn band_scales(&self, grid: &ScaleGrid, params: &MorletParams) -> Vec<bool> {
        grid.periods(params)
            .iter()
            .map(|p| *p >= self.spec.min_period && *p <= self.spec.max_period)
            .collect()
    }

    /// Ground-truth cells: burst window × in-band scales.
    pub fn truth_mask(&self, grid: &ScaleGrid, params: &MorletParams) -> Matrix<bool> {
        let band = self.band_scales(grid, params);
        let time = self.time_mask();
        let data = time
            .iter()
            .flat_map(|&t| band.iter().map(move |&b| t && b))
            .collect();
        Matrix::from_vec(time.len(), band.len(), data)
    }
}

/// Band-limited Gaussian noise of length `len` with exactly unit sample
/// standard deviation, built by masking the spectrum of white noise.
fn band_limited_noise<R: Rng>(
    len: usize,
    min_period: f64,
    max_period: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let keep = |k: usize| {
        let k = k.min(len - k);
        let f = k as f64 / len as f64;
        k > 0 && f >= 1.0 / max_period && f <= 1.0 / min_period
    };
    if !(1..len).any(keep) {
        return Err(Error::Synthetic(format!(
            "a {len}-sample window holds no frequency with period in [{min_period}, {max_period}]"
        )));
    }
    let mut buf: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        if !keep(k) {
            *b = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mu = x.iter().sum::<f64>() / len as f64;
    let sd = (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / len as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Synthetic(
            "band-limited noise came out degenerate".into(),
        ));
    }
    Ok(x.iter().map(|v| (v - mu) / sd).collect())
}

/// AR(1) baseline (identical to `gen_ar1` with the same seed) plus
/// band-limited noise inside the burst window.
pub fn gen_burst_series(
    n: usize,
    base: &Ar1Model,
    burst: &BurstSpec,
    seed: u64,
) -> Result<BurstSeries> {
    burst.validate(n)?;
    let baseline = gen_ar1(n, base.phi(), base.sigma2().sqrt(), seed)?;
    let mut values = baseline.values().to_vec();
    let amp = burst.added_std_ratio() * base.series_variance().sqrt();
    if amp > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let noise = band_limited_noise(burst.len(), burst.min_period, burst.max_period, &mut rng)?;
        for (v, e) in values[burst.start..burst.end].iter_mut().zip(noise) {
            *v += amp * e;
        }
    }
    Ok(BurstSeries {
        series: ReturnSeries::new(values, baseline.timestamps().to_vec(), "BURST")?,
        spec: *burst,
    })
}

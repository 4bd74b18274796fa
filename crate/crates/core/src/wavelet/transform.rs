use std::f64::consts::PI;
use std::sync::Arc;

use chrono::NaiveDate;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::morlet::PI_QUARTER_INV;
use super::{morlet_mother, MorletParams, ScaleGrid, MIN_SERIES_LEN};
use crate::data::ReturnSeries;
use crate::{Error, Matrix, Result};

/// Longest series [`cwt_direct`] accepts; it costs O(n²·J).
pub const DIRECT_MAX_LEN: usize = 2048;

/// Envelope widths kept clear between wrapped-around data and any cell
/// inside the cone of influence. e^(-6²/2) ≈ 1.5e-8.
const WRAP_GUARD_WIDTHS: f64 = 6.0;

/// Aliases are summed while the Gaussian argument stays within this many
/// widths of its centre.
const ALIAS_REACH: f64 = 40.0;

/// Complex coefficient matrix W(u, s), rows indexed by time, columns by scale.
#[derive(Debug, Clone)]
pub struct WaveletTransform {
    coefficients: Matrix<Complex64>,
    grid: ScaleGrid,
    params: MorletParams,
    series_mean: f64,
    series_energy: f64,
    timestamps: Vec<NaiveDate>,
    source_symbol: String,
}

impl WaveletTransform {
    pub fn coefficients(&self) -> &Matrix<Complex64> {
        &self.coefficients
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn params(&self) -> &MorletParams {
        &self.params
    }

    pub fn series_len(&self) -> usize {
        self.coefficients.rows()
    }

    /// Mean removed from the input before transforming.
    pub fn series_mean(&self) -> f64 {
        self.series_mean
    }

    /// Σ (x_t − mean)² of the input.
    pub fn series_energy(&self) -> f64 {
        self.series_energy
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    #[cfg(test)]
    pub(crate) fn from_test_parts(
        coefficients: Matrix<Complex64>,
        grid: ScaleGrid,
        params: MorletParams,
    ) -> Self {
        let n = coefficients.rows();
        Self {
            coefficients,
            grid,
            params,
            series_mean: 0.0,
            series_energy: 0.0,
            timestamps: crate::data::trading_days(n),
            source_symbol: String::new(),
        }
    }

    pub fn source_symbol(&self) -> &str {
        &self.source_symbol
    }
}

/// Zero-padded FFT length for a series of `n` samples.
///
/// Padding is the next power of two at or above the length at which the
/// circular wrap of the zero-padded series stays `WRAP_GUARD_WIDTHS`
/// Gaussian widths away from every cell inside the cone of influence, so
/// the fast transform matches the direct sum there.
pub fn padded_length(n: usize, params: &MorletParams) -> usize {
    let half = n.saturating_sub(1) as f64 / 2.0;
    let reach = (WRAP_GUARD_WIDTHS / params.efolding_factor() - 1.0).max(0.0) * half;
    (n.saturating_sub(1) + reach.ceil() as usize)
        .max(n)
        .next_power_of_two()
}

/// DFT of the sampled, scale-normalised wavelet: the untruncated Gaussian
/// Fourier form of the mother (which, unlike [`super::morlet_fourier`], keeps its
/// e^(-ω₀²/2)-small negative-frequency tail) folded over every alias of the
/// sampling frequency, times sqrt(2π·s/dt). This is the exact transform of
/// the kernel used by [`cwt_direct`].
fn periodized_filter(scale: f64, dt: f64, len: usize, params: &MorletParams) -> Vec<f64> {
    let norm = (2.0 * PI * scale / dt).sqrt();
    let fold = 2.0 * PI / dt;
    let step = fold / len as f64;
    let w0 = params.omega0();
    let gauss = |x: f64| {
        let d = x - w0;
        PI_QUARTER_INV * (-0.5 * d * d).exp()
    };
    (0..len)
        .map(|k| {
            let omega = k as f64 * step;
            let mut acc = 0.0;
            let mut m = 0.0;
            while scale * (omega + m * fold) - w0 <= ALIAS_REACH {
                acc += gauss(scale * (omega + m * fold));
                m += 1.0;
            }
            m = -1.0;
            while scale * (omega + m * fold) - w0 >= -ALIAS_REACH {
                acc += gauss(scale * (omega + m * fold));
                m -= 1.0;
            }
            norm * acc
        })
        .collect()
}

fn validate(values: &[f64], grid: &ScaleGrid) -> Result<()> {
    if values.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: values.len(),
            min: MIN_SERIES_LEN,
        });
    }
    if values.len() != grid.series_len() {
        return Err(Error::LengthMismatch {
            series: values.len(),
            grid: grid.series_len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn centered_energy(values: &[f64], mu: f64) -> f64 {
    values.iter().map(|v| (v - mu) * (v - mu)).sum()
}

/// Precomputed FFTs and filter bank for one (series length, grid, wavelet).
///
/// Reusing a plan across many series of the same length is what makes the
/// Monte Carlo null affordable.
pub struct CwtPlan {
    grid: ScaleGrid,
    params: MorletParams,
    padded_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    filters: Vec<Vec<f64>>,
}

impl std::fmt::Debug for CwtPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CwtPlan")
            .field("series_len", &self.grid.series_len())
            .field("scales", &self.grid.len())
            .field("padded_len", &self.padded_len)
            .finish()
    }
}

impl CwtPlan {
    pub fn new(grid: &ScaleGrid, params: &MorletParams) -> Result<Self> {
        let n = grid.series_len();
        if n < MIN_SERIES_LEN {
            return Err(Error::SeriesTooShort {
                len: n,
                min: MIN_SERIES_LEN,
            });
        }
        let padded_len = padded_length(n, params);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded_len);
        let inverse = planner.plan_fft_inverse(padded_len);
        let filters = grid
            .scales()
            .par_iter()
            .map(|&s| periodized_filter(s, grid.dt(), padded_len, params))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            padded_len,
            forward,
            inverse,
            filters,
        })
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn params(&self) -> &MorletParams {
        &self.params
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    /// Frequency response of scale `j` on the padded FFT grid.
    pub fn filter(&self, j: usize) -> &[f64] {
        &self.filters[j]
    }

    fn series_spectrum(&self, values: &[f64]) -> Result<(Vec<Complex64>, f64)> {
        validate(values, &self.grid)?;
        let mu = mean(values);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.padded_len];
        for (b, v) in buf.iter_mut().zip(values) {
            b.re = v - mu;
        }
        self.forward.process(&mut buf);
        Ok((buf, mu))
    }

    fn scratch(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        (
            vec![Complex64::new(0.0, 0.0); self.padded_len],
            vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()],
        )
    }

    /// Inverse-transforms scale `j` into `buf`; the first n entries are
    /// W(·, s_j).
    fn column_into(
        &self,
        spectrum: &[Complex64],
        j: usize,
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let scale = 1.0 / self.padded_len as f64;
        for ((b, x), h) in buf.iter_mut().zip(spectrum).zip(&self.filters[j]) {
            *b = x * (h * scale);
        }
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// Runs `f(j, column)` over every scale in parallel. Output order is by
    /// scale.
    fn map_columns<T: Send>(
        &self,
        spectrum: &[Complex64],
        f: impl Fn(usize, &[Complex64]) -> T + Sync,
    ) -> Vec<T> {
        let n = self.grid.series_len();
        (0..self.filters.len())
            .into_par_iter()
            .map_init(
                || self.scratch(),
                |(buf, scratch), j| {
                    self.column_into(spectrum, j, buf, scratch);
                    f(j, &buf[..n])
                },
            )
            .collect()
    }

    /// Coefficient matrix and removed mean for a raw value slice.
    pub fn coefficients(&self, values: &[f64]) -> Result<(Matrix<Complex64>, f64)> {
        let (spectrum, mu) = self.series_spectrum(values)?;
        let columns = self.map_columns(&spectrum, |_, col| col.to_vec());
        Ok((Matrix::from_columns(values.len(), &columns), mu))
    }

    /// Per-scale power columns |W(·, s_j)|² without assembling a matrix.
    pub fn power_columns(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (spectrum, _) = self.series_spectrum(values)?;
        Ok(self.map_columns(&spectrum, |_, col| {
            col.iter().map(|c| c.norm_sqr()).collect()
        }))
    }

    /// Same as [`CwtPlan::power_columns`] on the calling thread only, for
    /// callers that parallelise over many series instead.
    pub fn power_columns_serial(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (spectrum, _) = self.series_spectrum(values)?;
        let n = values.len();
        let (mut buf, mut scratch) = self.scratch();
        Ok((0..self.filters.len())
            .map(|j| {
                self.column_into(&spectrum, j, &mut buf, &mut scratch);
                buf[..n].iter().map(|c| c.norm_sqr()).collect()
            })
            .collect())
    }

    pub fn transform(&self, series: &ReturnSeries) -> Result<WaveletTransform> {
        let (coefficients, series_mean) = self.coefficients(series.values())?;
        Ok(WaveletTransform {
            coefficients,
            grid: self.grid.clone(),
            params: self.params,
            series_mean,
            series_energy: centered_energy(series.values(), series_mean),
            timestamps: series.timestamps().to_vec(),
            source_symbol: series.symbol().to_string(),
        })
    }
}

/// Forward transform by FFT. Deterministic: per-scale columns are computed
/// independently and assembled in scale order.
pub fn cwt(
    series: &ReturnSeries,
    grid: &ScaleGrid,
    params: &MorletParams,
) -> Result<WaveletTransform> {
    validate(series.values(), grid)?;
    CwtPlan::new(grid, params)?.transform(series)
}

/// Forward transform by the literal sum
/// W(u, s) = Σ_t x(t) · conj(ψ((t − u)·dt/s)) · sqrt(dt/s)
/// over the whole series, after the same mean removal as [`cwt`].
pub fn cwt_direct(
    series: &ReturnSeries,
    grid: &ScaleGrid,
    params: &MorletParams,
) -> Result<WaveletTransform> {
    let values = series.values();
    if values.len() > DIRECT_MAX_LEN {
        return Err(Error::OracleBudget {
            len: values.len(),
            max: DIRECT_MAX_LEN,
        });
    }
    validate(values, grid)?;
    let n = values.len();
    let mu = mean(values);
    let x: Vec<f64> = values.iter().map(|v| v - mu).collect();
    let dt = grid.dt();
    let columns: Vec<Vec<Complex64>> = grid
        .scales()
        .par_iter()
        .map(|&s| {
            let norm = (dt / s).sqrt();
            // Kernel indexed by lag + (n - 1), lag = t - u.
            let kernel: Vec<Complex64> = (0..2 * n - 1)
                .map(|i| {
                    let lag = i as f64 - (n - 1) as f64;
                    morlet_mother(lag * dt / s, params).conj() * norm
                })
                .collect();
            (0..n)
                .map(|u| {
                    let offset = n - 1 - u;
                    x.iter()
                        .enumerate()
                        .fold(Complex64::new(0.0, 0.0), |acc, (t, &xt)| {
                            acc + kernel[t + offset] * xt
                        })
                })
                .collect()
        })
        .collect();
    Ok(WaveletTransform {
        coefficients: Matrix::from_columns(n, &columns),
        grid: grid.clone(),
        params: *params,
        series_mean: mu,
        series_energy: centered_energy(values, mu),
        timestamps: series.timestamps().to_vec(),
        source_symbol: series.symbol().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::build_scale_grid;

    fn series(values: Vec<f64>) -> ReturnSeries {
        ReturnSeries::from_values(values, "test").unwrap()
    }

    #[test]
    fn padding_lengths() {
        let p = MorletParams::default();
        assert_eq!(padded_length(256, &p), 1024);
        assert_eq!(padded_length(2048, &p), 8192);
        assert_eq!(padded_length(3400, &p), 16384);
        assert!(padded_length(8, &p) >= 8);
    }

    #[test]
    fn zero_and_constant_series_vanish() {
        let p = MorletParams::default();
        let g = build_scale_grid(64, 1.0, 2.0, 0.25).unwrap();
        for v in [0.0, 3.25] {
            let w = cwt(&series(vec![v; 64]), &g, &p).unwrap();
            assert!(w.coefficients().iter().all(|c| c.norm() == 0.0));
            let d = cwt_direct(&series(vec![v; 64]), &g, &p).unwrap();
            assert!(d.coefficients().iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn impulse_sifts_the_kernel() {
        let p = MorletParams::default();
        let n = 128;
        let g = build_scale_grid(n, 1.0, 2.0, 0.5).unwrap();
        let mut v = vec![0.0; n];
        v[64] = 1.0;
        let d = cwt_direct(&series(v), &g, &p).unwrap();
        let mu = 1.0 / n as f64;
        for (j, &s) in g.scales().iter().enumerate() {
            for u in [10usize, 64, 100] {
                // Impulse minus its mean: the sum splits into the sifted
                // term and the mean times the kernel total.
                let total: Complex64 = (0..n)
                    .map(|t| morlet_mother((t as f64 - u as f64) / s, &p).conj())
                    .sum();
                let expect =
                    (morlet_mother((64.0 - u as f64) / s, &p).conj() - total * mu) / s.sqrt();
                let got = d.coefficients()[(u, j)];
                assert!((got - expect).norm() < 1e-12, "u={u} s={s}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = MorletParams::default();
        let g = build_scale_grid(64, 1.0, 2.0, 0.25).unwrap();
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert!(matches!(
            cwt(&series(vec![0.0; 63]), &g, &p),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            CwtPlan::new(&g, &p).unwrap().coefficients(&v),
            Err(Error::NonFinite { index: 5 })
        ));
        let long = build_scale_grid(4096, 1.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            cwt_direct(&series(vec![0.0; 4096]), &long, &p),
            Err(Error::OracleBudget { .. })
        ));
    }
}

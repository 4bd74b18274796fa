use std::f64::consts::{PI, SQRT_2};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// π^(-1/4), the Morlet normalisation and its value at t = 0.
pub const PI_QUARTER_INV: f64 = 0.751_125_544_464_942_5;

/// Morlet wavelet parameters. `omega0` is the dimensionless central frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorletParams {
    omega0: f64,
}

impl Default for MorletParams {
    fn default() -> Self {
        Self { omega0: 6.0 }
    }
}

impl MorletParams {
    pub fn new(omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "omega0 must be positive and finite, got {omega0}"
            )));
        }
        Ok(Self { omega0 })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Ratio of equivalent Fourier period to scale, 4π / (ω₀ + √(2 + ω₀²)).
    pub fn fourier_factor(&self) -> f64 {
        4.0 * PI / (self.omega0 + (2.0 + self.omega0 * self.omega0).sqrt())
    }

    /// e-folding time of the wavelet power autocorrelation, in units of scale.
    pub fn efolding_factor(&self) -> f64 {
        SQRT_2
    }
}

/// ψ(t) = π^(-1/4) e^(iω₀t) e^(-t²/2).
pub fn morlet_mother(t: f64, params: &MorletParams) -> Complex64 {
    let envelope = PI_QUARTER_INV * (-0.5 * t * t).exp();
    Complex64::from_polar(envelope, params.omega0 * t)
}

/// Fourier form of the mother wavelet with the analytic (positive-frequency)
/// cutoff: π^(-1/4) e^(-(ω - ω₀)²/2) for ω > 0, zero otherwise.
pub fn morlet_fourier(omega: f64, params: &MorletParams) -> f64 {
    if omega <= 0.0 {
        0.0
    } else {
        let d = omega - params.omega0;
        PI_QUARTER_INV * (-0.5 * d * d).exp()
    }
}

/// Fourier form with the small e^(-ω₀²/2) correction term that makes the
/// wavelet exactly zero-mean. Only the admissibility integral uses it: the
/// plain form is nonzero at ω → 0⁺ and would make that integral diverge.
fn admissible_fourier(omega: f64, params: &MorletParams) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let w0 = params.omega0;
    PI_QUARTER_INV * (-0.5 * (omega * omega + w0 * w0)).exp() * (omega * w0).exp_m1()
}

/// |Ψ(ω)|² / ω, the integrand of the admissibility constant.
pub fn admissibility_integrand(omega: f64, params: &MorletParams) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let v = admissible_fourier(omega, params);
    v * v / omega
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// C_Ψ = ∫₀^∞ |Ψ(ω)|²/ω dω by composite Simpson, refined until two
/// successive grids agree to 1e-12 relative.
pub fn admissibility_constant(params: &MorletParams) -> Result<f64> {
    if params.omega0 < 5.0 {
        return Err(Error::InvalidParams(format!(
            "admissibility constant needs omega0 >= 5, got {}",
            params.omega0
        )));
    }
    // The Gaussian factor is below e^-200 past ω₀ + 20.
    let upper = params.omega0 + 20.0;
    let f = |w: f64| admissibility_integrand(w, params);
    let mut panels = 512;
    let mut coarse = simpson(f, 0.0, upper, panels);
    while panels < (1 << 22) {
        panels *= 2;
        let fine = simpson(f, 0.0, upper, panels);
        if !fine.is_finite() {
            break;
        }
        if (fine - coarse).abs() <= 1e-12 * fine.abs() {
            return if fine > 0.0 {
                Ok(fine)
            } else {
                Err(Error::Quadrature(format!("non-positive value {fine}")))
            };
        }
        coarse = fine;
    }
    Err(Error::Quadrature(format!(
        "no convergence for omega0 = {}",
        params.omega0
    )))
}

/// Reconstruction constant C_δ: the real part of the transform of a unit
/// impulse, summed over scales, on a reference filter bank that spans the
/// whole wavelet band (scales down to dt/8, no aliasing).
fn reference_delta_constant(params: &MorletParams) -> f64 {
    const LEN: usize = 1 << 14;
    const DJ: f64 = 1.0 / 16.0;
    let s_min = 0.125;
    let count = ((LEN as f64 / 4.0 / s_min).log2() / DJ).floor() as usize + 1;
    let dw = 2.0 * PI / LEN as f64;
    let mut total = 0.0;
    for j in 0..count {
        let s = s_min * (j as f64 * DJ).exp2();
        let norm = (2.0 * PI * s).sqrt();
        // Only positive frequencies contribute; skip bins where the
        // Gaussian has underflowed.
        let mut response = 0.0;
        for k in 1..=LEN / 2 {
            let x = s * k as f64 * dw;
            if x - params.omega0 > 40.0 {
                break;
            }
            response += norm * morlet_fourier(x, params);
        }
        total += response / LEN as f64 / s.sqrt();
    }
    DJ / PI_QUARTER_INV * total
}

fn cached_delta_constant(params: &MorletParams) -> f64 {
    static CACHE: Mutex<Vec<(u64, f64)>> = Mutex::new(Vec::new());
    let key = params.omega0.to_bits();
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(&(_, v)) = cache.iter().find(|(k, _)| *k == key) {
        return v;
    }
    let v = reference_delta_constant(params);
    cache.push((key, v));
    v
}

/// The Morlet family for one central frequency, with the constants needed
/// to invert the transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletBasis {
    params: MorletParams,
    admissibility_constant: f64,
    delta_constant: f64,
}

impl WaveletBasis {
    pub fn new(params: MorletParams) -> Result<Self> {
        let admissibility_constant = admissibility_constant(&params)?;
        Ok(Self {
            params,
            admissibility_constant,
            delta_constant: cached_delta_constant(&params),
        })
    }

    pub fn params(&self) -> &MorletParams {
        &self.params
    }

    pub fn mother(&self, t: f64) -> Complex64 {
        morlet_mother(t, &self.params)
    }

    pub fn fourier_form(&self, omega: f64) -> f64 {
        morlet_fourier(omega, &self.params)
    }

    pub fn admissibility_constant(&self) -> f64 {
        self.admissibility_constant
    }

    /// C_δ, about 0.776 for ω₀ = 6.
    pub fn delta_constant(&self) -> f64 {
        self.delta_constant
    }

    /// ψ(0) = π^(-1/4).
    pub fn mother_at_zero(&self) -> f64 {
        PI_QUARTER_INV
    }
}

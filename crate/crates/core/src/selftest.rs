//! Quick built-in checks run by `cwt-spectra selftest`: FFT against direct
//! transform, artifact round trips, and red-noise calibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::artifacts;
use crate::data::{parse_ohlc_csv, read_returns_csv, write_ohlc_csv, ColumnSchema, OhlcRecord};
use crate::pipeline::{analyze_series, AnalysisConfig};
use crate::significance::{significance_mask, significance_thresholds, Ar1Model};
use crate::synthetic::{derive_seed, gen_ar1};
use crate::wavelet::{
    build_scale_grid, cone_of_influence, cwt, cwt_direct, power, CwtPlan, MorletParams,
    WaveletTransform,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Largest elementwise relative difference between two transforms over the
/// cells inside the cone of influence.
pub fn oracle_discrepancy(fast: &WaveletTransform, direct: &WaveletTransform) -> f64 {
    let n = fast.series_len();
    let coi = cone_of_influence(n, fast.grid().dt(), fast.params());
    let scales = fast.grid().scales();
    fast.coefficients()
        .indexed()
        .filter(|((t, j), _)| scales[*j] <= coi[*t])
        .map(|(ij, a)| {
            let b = direct.coefficients()[ij];
            (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

fn oracle_check() -> Result<Check> {
    let params = MorletParams::default();
    let grid = build_scale_grid(128, 1.0, 2.0, 1.0 / 8.0)?;
    let mut worst: f64 = 0.0;
    for (i, phi) in [0.0, 0.5, 0.8].into_iter().enumerate() {
        let series = gen_ar1(128, phi, 1.0, derive_seed(0x5e1f, i as u64))?;
        let fast = cwt(&series, &grid, &params)?;
        let direct = cwt_direct(&series, &grid, &params)?;
        worst = worst.max(oracle_discrepancy(&fast, &direct));
    }
    Ok(Check {
        name: "oracle equivalence",
        passed: worst <= 1e-6,
        detail: format!("max relative difference inside COI {worst:.2e} (limit 1e-6)"),
    })
}

fn round_trip_check() -> Result<Check> {
    let mut failures = Vec::new();
    let series = gen_ar1(300, 0.4, 0.01, 77)?;
    let config = AnalysisConfig::default();
    let a = analyze_series(&series, &config)?;

    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    if read_returns_csv(buf.as_slice(), series.symbol())? != series {
        failures.push("returns");
    }
    buf.clear();
    artifacts::write_spectrum(&a.spectrum, &mut buf)?;
    if artifacts::read_spectrum(std::str::from_utf8(&buf).unwrap_or(""))? != a.spectrum {
        failures.push("spectrum");
    }
    buf.clear();
    artifacts::write_mask(&a.spectrum, &a.result, &mut buf)?;
    let (dates, mask) = artifacts::read_mask(std::str::from_utf8(&buf).unwrap_or(""))?;
    if dates != a.spectrum.timestamps() || mask != a.result.mask {
        failures.push("mask");
    }
    buf.clear();
    artifacts::write_thresholds(&a.spectrum, &a.thresholds, &mut buf)?;
    let (scales, t) = artifacts::read_thresholds(std::str::from_utf8(&buf).unwrap_or(""))?;
    if scales != a.spectrum.grid().scales() || t != a.thresholds {
        failures.push("thresholds");
    }
    buf.clear();
    artifacts::write_coi(&a.spectrum, &mut buf)?;
    let (_, coi) = artifacts::read_coi(std::str::from_utf8(&buf).unwrap_or(""))?;
    if coi != a.spectrum.coi() {
        failures.push("coi");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let records: Vec<OhlcRecord> = series
        .timestamps()
        .iter()
        .map(|&d| {
            let open: f64 = rng.random_range(50.0..150.0);
            let close: f64 = rng.random_range(50.0..150.0);
            OhlcRecord::new(d, open, open.max(close) + 1.0, open.min(close) - 1.0, close)
        })
        .collect::<Result<_>>()?;
    buf.clear();
    write_ohlc_csv(&records, &mut buf)?;
    if parse_ohlc_csv(&buf, &ColumnSchema::default())?.records != records {
        failures.push("ohlc");
    }

    Ok(Check {
        name: "artifact round trip",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "returns, ohlc, spectrum, mask, thresholds and coi files read back exactly".into()
        } else {
            format!("mismatch in {}", failures.join(", "))
        },
    })
}

fn calibration_check() -> Result<Check> {
    const RUNS: u64 = 100;
    let n = 1024;
    let params = MorletParams::default();
    let grid = build_scale_grid(n, 1.0, 2.0, 1.0 / 12.0)?;
    let plan = CwtPlan::new(&grid, &params)?;
    let model = Ar1Model::new(0.5, 1.0)?;
    let thresholds = significance_thresholds(&model, &grid, &params, 0.95)?;
    let mut significant = 0usize;
    let mut reliable = 0usize;
    for i in 0..RUNS {
        let series = gen_ar1(n, 0.5, 1.0, derive_seed(0xca1b, i))?;
        let spectrum = power(&plan.transform(&series)?);
        let s = significance_mask(&spectrum, &thresholds)?.summary();
        significant += s.reliable_significant;
        reliable += s.reliable;
    }
    if reliable == 0 {
        return Err(Error::Invariant(
            "calibration grid has no interior cells".into(),
        ));
    }
    let fraction = significant as f64 / reliable as f64;
    Ok(Check {
        name: "red-noise calibration",
        passed: (fraction - 0.05).abs() <= 0.02,
        detail: format!(
            "{:.2}% of interior cells significant at 95% over {RUNS} AR(1) surrogates (target 5 ± 2%)",
            100.0 * fraction
        ),
    })
}

type Suite = (&'static str, fn() -> Result<Check>);

/// Runs every check. An error inside a check is reported as its failure.
pub fn run_selftest() -> Vec<Check> {
    let suites: [Suite; 3] = [
        ("oracle equivalence", oracle_check),
        ("artifact round trip", round_trip_check),
        ("red-noise calibration", calibration_check),
    ];
    suites
        .into_iter()
        .map(|(name, f)| {
            f().unwrap_or_else(|e| Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}

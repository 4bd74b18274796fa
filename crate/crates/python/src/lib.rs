//! Python bindings: wavelet power spectra, red-noise significance and the
//! synthetic generators, with results returned as plain Python lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyConnectionError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use spectra::data::ReturnSeries;
use spectra::pipeline::{self, AnalysisConfig};
use spectra::significance::{Ar1Model, NullMethod};
use spectra::synthetic::{self, BurstSpec};
use spectra::wavelet::{build_scale_grid, CwtPlan, MorletParams};
use spectra::{Error, ErrorKind, Matrix};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Input => PyValueError::new_err(msg),
        ErrorKind::Numerical => PyRuntimeError::new_err(msg),
        ErrorKind::Network => PyConnectionError::new_err(msg),
        ErrorKind::Io => PyOSError::new_err(msg),
    }
}

fn rows<T: Copy>(m: &Matrix<T>) -> Vec<Vec<T>> {
    (0..m.rows()).map(|t| m.row(t).to_vec()).collect()
}

fn null_method(name: &str) -> PyResult<NullMethod> {
    match name {
        "analytic" => Ok(NullMethod::Analytic),
        "mc" | "monte-carlo" => Ok(NullMethod::MonteCarlo),
        other => Err(PyValueError::new_err(format!(
            "null must be 'analytic' or 'mc', got '{other}'"
        ))),
    }
}

/// Result of `analyze`: power, significance and cone of influence, with
/// matrices as lists of rows indexed [time][scale].
#[pyclass(frozen, module = "cwt_spectra")]
struct Spectrum {
    #[pyo3(get)]
    power: Vec<Vec<f64>>,
    #[pyo3(get)]
    mask: Vec<Vec<bool>>,
    #[pyo3(get)]
    scales: Vec<f64>,
    #[pyo3(get)]
    periods: Vec<f64>,
    #[pyo3(get)]
    coi: Vec<f64>,
    #[pyo3(get)]
    thresholds: Vec<f64>,
    #[pyo3(get)]
    dof: Vec<f64>,
    #[pyo3(get)]
    phi: f64,
    #[pyo3(get)]
    variance: f64,
    #[pyo3(get)]
    level: f64,
    #[pyo3(get)]
    significant_fraction: f64,
    #[pyo3(get)]
    interior_significant_fraction: f64,
}

#[pymethods]
impl Spectrum {
    fn __repr__(&self) -> String {
        format!(
            "Spectrum(times={}, scales={}, phi={:.4}, interior_significant={:.4})",
            self.power.len(),
            self.scales.len(),
            self.phi,
            self.interior_significant_fraction
        )
    }
}

/// Wavelet power spectrum of `values` with an AR(1) significance test.
#[pyfunction]
#[pyo3(signature = (values, s0=2.0, dj=1.0/12.0, omega0=6.0, level=0.95, null="analytic", mc_runs=1000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn analyze(
    py: Python<'_>,
    values: Vec<f64>,
    s0: f64,
    dj: f64,
    omega0: f64,
    level: f64,
    null: &str,
    mc_runs: usize,
    seed: u64,
) -> PyResult<Spectrum> {
    let config = AnalysisConfig {
        s0,
        dj,
        omega0,
        level,
        null_method: null_method(null)?,
        mc_runs,
        seed,
        ..AnalysisConfig::default()
    };
    let a = py
        .detach(|| {
            let series = ReturnSeries::from_values(values, "PY")?;
            pipeline::analyze_series(&series, &config)
        })
        .map_err(to_py)?;
    let grid = a.spectrum.grid();
    Ok(Spectrum {
        power: rows(a.spectrum.power()),
        mask: rows(&a.result.mask),
        scales: grid.scales().to_vec(),
        periods: grid.periods(&a.params),
        coi: a.spectrum.coi().to_vec(),
        thresholds: a.thresholds.values.clone(),
        dof: a.thresholds.dof.clone(),
        phi: a.model.phi(),
        variance: a.model.series_variance(),
        level: a.result.level,
        significant_fraction: a.result.significant_fraction(),
        interior_significant_fraction: a.result.interior_significant_fraction(),
    })
}

/// Wavelet power |W|² as rows [time][scale], without significance testing.
#[pyfunction]
#[pyo3(signature = (values, s0=2.0, dj=1.0/12.0, omega0=6.0))]
fn cwt_power(
    py: Python<'_>,
    values: Vec<f64>,
    s0: f64,
    dj: f64,
    omega0: f64,
) -> PyResult<Vec<Vec<f64>>> {
    py.detach(|| {
        let params = MorletParams::new(omega0)?;
        let grid = build_scale_grid(values.len(), 1.0, s0, dj)?;
        let columns = CwtPlan::new(&grid, &params)?.power_columns(&values)?;
        Ok(rows(&Matrix::from_columns(values.len(), &columns)))
    })
    .map_err(to_py)
}

/// Scales of the grid used for a series of length `n`.
#[pyfunction]
#[pyo3(signature = (n, s0=2.0, dj=1.0/12.0))]
fn scale_grid(n: usize, s0: f64, dj: f64) -> PyResult<Vec<f64>> {
    Ok(build_scale_grid(n, 1.0, s0, dj)
        .map_err(to_py)?
        .scales()
        .to_vec())
}

/// Scale-to-period factor of the Morlet wavelet.
#[pyfunction]
#[pyo3(signature = (omega0=6.0))]
fn fourier_factor(omega0: f64) -> PyResult<f64> {
    Ok(MorletParams::new(omega0).map_err(to_py)?.fourier_factor())
}

/// AR(1) series x_t = phi·x_{t−1} + N(0, sigma²).
#[pyfunction]
#[pyo3(signature = (n, phi=0.0, sigma=1.0, seed=0))]
fn gen_ar1(n: usize, phi: f64, sigma: f64, seed: u64) -> PyResult<Vec<f64>> {
    Ok(synthetic::gen_ar1(n, phi, sigma, seed)
        .map_err(to_py)?
        .values()
        .to_vec())
}

/// AR(1) baseline with a band-limited burst; returns (values, truth mask
/// as rows [time][scale] on the default grid).
#[pyfunction]
#[pyo3(signature = (n, start, end, band_min=2.0, band_max=8.0, ratio=4.0, phi=0.0, sigma=1.0, seed=0, s0=2.0, dj=1.0/12.0))]
#[allow(clippy::too_many_arguments)]
fn gen_burst(
    n: usize,
    start: usize,
    end: usize,
    band_min: f64,
    band_max: f64,
    ratio: f64,
    phi: f64,
    sigma: f64,
    seed: u64,
    s0: f64,
    dj: f64,
) -> PyResult<(Vec<f64>, Vec<Vec<bool>>)> {
    let spec = BurstSpec {
        start,
        end,
        min_period: band_min,
        max_period: band_max,
        amplitude_ratio: ratio,
    };
    let run = || -> spectra::Result<_> {
        let model = Ar1Model::new(phi, sigma * sigma)?;
        let burst = synthetic::gen_burst_series(n, &model, &spec, seed)?;
        let grid = build_scale_grid(n, 1.0, s0, dj)?;
        let truth = burst.truth_mask(&grid, &MorletParams::default());
        Ok((burst.series.values().to_vec(), rows(&truth)))
    };
    run().map_err(to_py)
}

/// Full `analyze` run on a file or URL, writing artifacts to `out`.
/// Returns the manifest as a JSON string.
#[pyfunction]
#[pyo3(signature = (input, out, level=0.95, null="analytic", mc_runs=1000, seed=0))]
fn run_analysis(
    py: Python<'_>,
    input: String,
    out: PathBuf,
    level: f64,
    null: &str,
    mc_runs: usize,
    seed: u64,
) -> PyResult<String> {
    let config = AnalysisConfig {
        input,
        out_dir: out,
        level,
        null_method: null_method(null)?,
        mc_runs,
        seed,
        ..AnalysisConfig::default()
    };
    py.detach(|| pipeline::run_analysis(&config)?.manifest.to_json())
        .map_err(to_py)
}

/// Built-in checks as (name, passed, detail) tuples.
#[pyfunction]
fn selftest(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(spectra::selftest::run_selftest)
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn cwt_spectra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", spectra::VERSION)?;
    m.add_class::<Spectrum>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(cwt_power, m)?)?;
    m.add_function(wrap_pyfunction!(scale_grid, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_factor, m)?)?;
    m.add_function(wrap_pyfunction!(gen_ar1, m)?)?;
    m.add_function(wrap_pyfunction!(gen_burst, m)?)?;
    m.add_function(wrap_pyfunction!(run_analysis, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}

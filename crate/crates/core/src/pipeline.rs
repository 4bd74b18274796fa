//! End-to-end runs: ingest, transform, significance, export.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    self, sha256_hex, write_atomic, GridInfo, InputInfo, Manifest, SeriesInfo, SignificanceInfo,
};
use crate::data::{
    fetch_csv, log_returns, parse_ohlc_csv, read_returns_csv, ColumnSchema, ReturnSeries,
};
use crate::render::{render_heatmap, RenderOptions};
use crate::significance::{
    fit_ar1, monte_carlo_thresholds, significance_mask, significance_thresholds, Ar1Model,
    NullMethod, SignificanceResult, Thresholds,
};
use crate::synthetic::{gen_ar1, gen_burst_series, BurstSpec};
use crate::wavelet::{build_scale_grid, power, CwtPlan, MorletParams, PowerSpectrum};
use crate::{Error, Result, VERSION};

/// Settings of one `analyze` run. Everything except the output directory is
/// recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// File path, or an http(s) URL.
    pub input: String,
    pub schema: ColumnSchema,
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
    pub omega0: f64,
    pub s0: f64,
    pub dj: f64,
    pub level: f64,
    pub null_method: NullMethod,
    pub mc_runs: usize,
    pub seed: u64,
    pub fetch_timeout_secs: u64,
    pub fetch_retries: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input: String::new(),
            schema: ColumnSchema::default(),
            date_from: None,
            date_to: None,
            omega0: 6.0,
            s0: 2.0,
            dj: 1.0 / 12.0,
            level: 0.95,
            null_method: NullMethod::Analytic,
            mc_runs: 1000,
            seed: 0,
            fetch_timeout_secs: 30,
            fetch_retries: 3,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl AnalysisConfig {
    fn is_url(&self) -> bool {
        self.input.starts_with("http://") || self.input.starts_with("https://")
    }

    /// Symbol taken from the input's file stem.
    pub fn symbol(&self) -> String {
        let last = self
            .input
            .rsplit(['/', '\\'])
            .next()
            .unwrap_or("")
            .split(['?', '#'])
            .next()
            .unwrap_or("");
        let stem = Path::new(last)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("");
        if stem.is_empty() {
            "SERIES".into()
        } else {
            stem.to_string()
        }
    }
}

/// The in-memory results of analysing one series.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub params: MorletParams,
    pub model: Ar1Model,
    pub spectrum: PowerSpectrum,
    pub thresholds: Thresholds,
    pub result: SignificanceResult,
}

/// Transform, fit the red-noise null and test every cell, using the
/// numeric settings of `config` (its input and output fields are ignored).
pub fn analyze_series(series: &ReturnSeries, config: &AnalysisConfig) -> Result<Analysis> {
    let params = MorletParams::new(config.omega0)?;
    let grid = build_scale_grid(series.len(), 1.0, config.s0, config.dj)?;
    let plan = CwtPlan::new(&grid, &params)?;
    let spectrum = power(&plan.transform(series)?);
    if let Some(p) = spectrum
        .power()
        .iter()
        .find(|p| !(p.is_finite() && **p >= 0.0))
    {
        return Err(Error::Invariant(format!("wavelet power produced {p}")));
    }
    let model = fit_ar1(series)?;
    let thresholds = match config.null_method {
        NullMethod::Analytic => significance_thresholds(&model, &grid, &params, config.level)?,
        NullMethod::MonteCarlo => monte_carlo_thresholds(
            &model,
            &grid,
            &params,
            config.level,
            config.mc_runs,
            config.seed,
        )?,
    };
    if thresholds
        .values
        .iter()
        .any(|v| !(v.is_finite() && *v > 0.0))
    {
        return Err(Error::Invariant(
            "non-positive significance threshold".into(),
        ));
    }
    let result = significance_mask(&spectrum, &thresholds)?;
    Ok(Analysis {
        params,
        model,
        spectrum,
        thresholds,
        result,
    })
}

/// Reads the configured input, from disk or over HTTP.
pub fn load_input(config: &AnalysisConfig) -> Result<Vec<u8>> {
    if config.input.is_empty() {
        return Err(Error::Data("no input given".into()));
    }
    if config.is_url() {
        fetch_csv(
            &config.input,
            Duration::from_secs(config.fetch_timeout_secs),
            config.fetch_retries,
        )
    } else {
        fs::read(&config.input)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", config.input)))
    }
}

/// Input format, decided from the header row: the two-column returns
/// format written by this crate, or an OHLC price file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Ohlc,
    Returns,
}

impl InputFormat {
    pub fn detect(bytes: &[u8]) -> Self {
        let first = bytes
            .split(|&b| b == b'\n')
            .map(|l| {
                String::from_utf8_lossy(l)
                    .trim()
                    .trim_start_matches('\u{feff}')
                    .to_string()
            })
            .find(|l| !l.is_empty())
            .unwrap_or_default();
        if first == "date,log_return" {
            InputFormat::Returns
        } else {
            InputFormat::Ohlc
        }
    }

    fn name(self) -> &'static str {
        match self {
            InputFormat::Ohlc => "ohlc",
            InputFormat::Returns => "returns",
        }
    }
}

/// Parses input bytes into a return series; also reports dropped rows.
pub fn parse_input(
    bytes: &[u8],
    schema: &ColumnSchema,
    symbol: &str,
) -> Result<(ReturnSeries, InputFormat, usize)> {
    match InputFormat::detect(bytes) {
        InputFormat::Returns => Ok((read_returns_csv(bytes, symbol)?, InputFormat::Returns, 0)),
        InputFormat::Ohlc => {
            let parsed = parse_ohlc_csv(bytes, schema)?;
            Ok((
                log_returns(&parsed.records, symbol)?,
                InputFormat::Ohlc,
                parsed.dropped,
            ))
        }
    }
}

/// What an `analyze` run wrote.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub analysis: Analysis,
}

/// Runs the full pipeline and writes the artifact set to `config.out_dir`.
/// Identical configuration and input give byte-identical files.
pub fn run_analysis(config: &AnalysisConfig) -> Result<AnalysisReport> {
    let bytes = load_input(config)?;
    let symbol = config.symbol();
    let (full, format, dropped) = parse_input(&bytes, &config.schema, &symbol)?;
    let series = full.restrict(config.date_from, config.date_to)?;
    let analysis = analyze_series(&series, config)?;
    let params = analysis.params;
    let render = RenderOptions::default();

    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    files.push((artifacts::RETURNS_FILE, std::mem::take(&mut buf)));
    artifacts::write_spectrum(&analysis.spectrum, &mut buf)?;
    files.push((artifacts::SPECTRUM_FILE, std::mem::take(&mut buf)));
    artifacts::write_thresholds(&analysis.spectrum, &analysis.thresholds, &mut buf)?;
    files.push((artifacts::THRESHOLDS_FILE, std::mem::take(&mut buf)));
    artifacts::write_mask(&analysis.spectrum, &analysis.result, &mut buf)?;
    files.push((artifacts::MASK_FILE, std::mem::take(&mut buf)));
    artifacts::write_coi(&analysis.spectrum, &mut buf)?;
    files.push((artifacts::COI_FILE, std::mem::take(&mut buf)));
    files.push((
        artifacts::HEATMAP_FILE,
        render_heatmap(&analysis.spectrum, &analysis.result, &render)?,
    ));

    let grid = analysis.spectrum.grid();
    let manifest = Manifest {
        software: "cwt-spectra".into(),
        version: VERSION.into(),
        config: config.clone(),
        input: InputInfo {
            source: config.input.clone(),
            format: format.name().into(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
            rows_dropped: dropped,
        },
        series: SeriesInfo {
            symbol: series.symbol().into(),
            len: series.len(),
            first_date: series.timestamps()[0],
            last_date: series.timestamps()[series.len() - 1],
        },
        grid: GridInfo {
            s0: grid.s0(),
            dj: grid.dj(),
            dt: grid.dt(),
            scales: grid.len(),
            max_scale: grid.max_scale(),
            fourier_factor: params.fourier_factor(),
        },
        ar1: analysis.model,
        significance: SignificanceInfo {
            method: analysis.thresholds.method,
            level: analysis.thresholds.level,
            mc_runs: analysis.thresholds.mc_runs,
            summary: analysis.result.summary(),
        },
        render,
        artifacts: files
            .iter()
            .map(|(name, b)| (name.to_string(), sha256_hex(b)))
            .collect::<BTreeMap<_, _>>(),
    };

    fs::create_dir_all(&config.out_dir)?;
    for (name, b) in &files {
        write_atomic(&config.out_dir, name, b)?;
    }
    write_atomic(
        &config.out_dir,
        artifacts::MANIFEST_FILE,
        manifest.to_json()?.as_bytes(),
    )?;
    Ok(AnalysisReport {
        out_dir: config.out_dir.clone(),
        manifest,
        analysis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationKind {
    Ar1,
    Burst,
}

/// Settings of one `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub kind: SimulationKind,
    pub n: usize,
    pub phi: f64,
    pub sigma: f64,
    pub burst: Option<BurstSpec>,
    pub seed: u64,
    /// Grid used for the ground-truth mask.
    pub omega0: f64,
    pub s0: f64,
    pub dj: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            kind: SimulationKind::Ar1,
            n: 2048,
            phi: 0.0,
            sigma: 1.0,
            burst: None,
            seed: 0,
            omega0: 6.0,
            s0: 2.0,
            dj: 1.0 / 12.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

pub const SIMULATION_MANIFEST_FILE: &str = "simulation.json";

/// Writes a synthetic returns CSV, plus the ground-truth mask for bursts.
/// Returns the names of the files written.
pub fn run_simulation(config: &SimulationConfig) -> Result<Vec<String>> {
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    match config.kind {
        SimulationKind::Ar1 => {
            gen_ar1(config.n, config.phi, config.sigma, config.seed)?.write_csv(&mut buf)?;
            files.push((artifacts::RETURNS_FILE, buf));
        }
        SimulationKind::Burst => {
            let spec = config
                .burst
                .ok_or_else(|| Error::Synthetic("burst simulation needs a burst spec".into()))?;
            let model = Ar1Model::new(config.phi, config.sigma * config.sigma)?;
            let burst = gen_burst_series(config.n, &model, &spec, config.seed)?;
            burst.series.write_csv(&mut buf)?;
            files.push((artifacts::RETURNS_FILE, std::mem::take(&mut buf)));
            let params = MorletParams::new(config.omega0)?;
            let grid = build_scale_grid(config.n, 1.0, config.s0, config.dj)?;
            artifacts::write_truth_mask(
                burst.series.timestamps(),
                grid.scales(),
                &burst.truth_mask(&grid, &params),
                &mut buf,
            )?;
            files.push((artifacts::TRUTH_MASK_FILE, buf));
        }
    }
    let mut manifest = serde_json::to_string_pretty(&serde_json::json!({
        "software": "cwt-spectra",
        "version": VERSION,
        "config": config,
        "artifacts": files
            .iter()
            .map(|(name, b)| (name.to_string(), sha256_hex(b)))
            .collect::<BTreeMap<_, _>>(),
    }))?;
    manifest.push('\n');
    fs::create_dir_all(&config.out_dir)?;
    for (name, b) in &files {
        write_atomic(&config.out_dir, name, b)?;
    }
    write_atomic(
        &config.out_dir,
        SIMULATION_MANIFEST_FILE,
        manifest.as_bytes(),
    )?;
    let mut names: Vec<String> = files.iter().map(|(n, _)| n.to_string()).collect();
    names.push(SIMULATION_MANIFEST_FILE.into());
    Ok(names)
}

/// Re-renders the heatmap of an existing run directory to `out`.
pub fn render_run(dir: &Path, options: &RenderOptions, out: &Path) -> Result<()> {
    let run = artifacts::load_run(dir)?;
    let bytes = render_heatmap(&run.spectrum, &run.result, options)?;
    let parent = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = out
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Render(format!("bad output path {}", out.display())))?;
    write_atomic(parent, name, &bytes)
}

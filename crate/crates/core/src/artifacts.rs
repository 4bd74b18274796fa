//! On-disk artifact formats and their readers.
//!
//! Matrix files (power, mask) are plain CSV preceded by `# key=value`
//! metadata lines. The first CSV row is `date` followed by the scales, and
//! each later row is one time index. Floats are written in shortest
//! round-trip exponent form so that reading a file back gives the exact
//! values that were written.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{parse_date, read_returns_csv, ReturnSeries};
use crate::pipeline::AnalysisConfig;
use crate::render::RenderOptions;
use crate::significance::{Ar1Model, MaskSummary, NullMethod, SignificanceResult, Thresholds};
use crate::wavelet::{build_scale_grid, cone_of_influence, MorletParams, PowerSpectrum};
use crate::{Error, Matrix, Result};

pub const RETURNS_FILE: &str = "returns.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const THRESHOLDS_FILE: &str = "thresholds.csv";
pub const MASK_FILE: &str = "mask.csv";
pub const COI_FILE: &str = "coi.csv";
pub const HEATMAP_FILE: &str = "heatmap.png";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRUTH_MASK_FILE: &str = "truth_mask.csv";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Artifact(format!("bad number '{s}' in {what}")))
}

fn fmt_date(d: &NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

fn parse_day(s: &str, what: &str) -> Result<NaiveDate> {
    parse_date(s).ok_or_else(|| Error::Artifact(format!("bad date '{s}' in {what}")))
}

/// A parsed matrix file: metadata, column header (after `date`), dates and
/// the raw cell strings.
struct Table {
    meta: BTreeMap<String, String>,
    header: Vec<String>,
    dates: Vec<NaiveDate>,
    cells: Vec<Vec<String>>,
}

impl Table {
    fn meta(&self, key: &str, what: &str) -> Result<&str> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Artifact(format!("{what}: missing metadata '{key}'")))
    }

    fn meta_f64(&self, key: &str, what: &str) -> Result<f64> {
        parse_f64(self.meta(key, what)?, what)
    }
}

fn write_table<W: Write>(
    mut out: W,
    meta: &[(&str, String)],
    header: &[String],
    dates: &[NaiveDate],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "date,{}", header.join(","))?;
    for (d, row) in dates.iter().zip(rows) {
        writeln!(out, "{},{}", fmt_date(d), row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn read_table(text: &str, what: &str) -> Result<Table> {
    let mut meta = BTreeMap::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next_if(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::Artifact(format!("{what}: bad metadata line '{line}'")))?;
        meta.insert(k.trim().to_string(), v.trim().to_string());
    }
    let head = lines
        .next()
        .ok_or_else(|| Error::Artifact(format!("{what}: missing header row")))?;
    let mut fields = head.split(',');
    if fields.next() != Some("date") {
        return Err(Error::Artifact(format!(
            "{what}: header must start with 'date'"
        )));
    }
    let header: Vec<String> = fields.map(str::to_string).collect();
    let mut dates = Vec::new();
    let mut cells = Vec::new();
    for (i, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        let mut f = line.split(',');
        dates.push(parse_day(f.next().unwrap_or(""), what)?);
        let row: Vec<String> = f.map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Error::Artifact(format!(
                "{what}: row {} has {} cells, expected {}",
                i + 1,
                row.len(),
                header.len()
            )));
        }
        cells.push(row);
    }
    Ok(Table {
        meta,
        header,
        dates,
        cells,
    })
}

fn grid_meta(spectrum: &PowerSpectrum) -> Vec<(&'static str, String)> {
    let g = spectrum.grid();
    vec![
        ("omega0", fmt_f64(spectrum.params().omega0())),
        ("s0", fmt_f64(g.s0())),
        ("dj", fmt_f64(g.dj())),
        ("dt", fmt_f64(g.dt())),
    ]
}

fn scale_header(spectrum: &PowerSpectrum) -> Vec<String> {
    spectrum
        .grid()
        .scales()
        .iter()
        .map(|&s| fmt_f64(s))
        .collect()
}

/// Power matrix with a grid header block.
pub fn write_spectrum<W: Write>(spectrum: &PowerSpectrum, out: W) -> Result<()> {
    let power = spectrum.power();
    write_table(
        out,
        &grid_meta(spectrum),
        &scale_header(spectrum),
        spectrum.timestamps(),
        (0..power.rows()).map(|t| power.row(t).iter().map(|&p| fmt_f64(p)).collect()),
    )
}

/// Reads a spectrum file. The grid is rebuilt from the metadata and must
/// reproduce the header's scales; the cone of influence is recomputed.
pub fn read_spectrum(text: &str) -> Result<PowerSpectrum> {
    const WHAT: &str = "spectrum file";
    let table = read_table(text, WHAT)?;
    let params = MorletParams::new(table.meta_f64("omega0", WHAT)?)?;
    let n = table.dates.len();
    let dt = table.meta_f64("dt", WHAT)?;
    let grid = build_scale_grid(
        n,
        dt,
        table.meta_f64("s0", WHAT)?,
        table.meta_f64("dj", WHAT)?,
    )?;
    let scales = table
        .header
        .iter()
        .map(|s| parse_f64(s, WHAT))
        .collect::<Result<Vec<_>>>()?;
    if scales != grid.scales() {
        return Err(Error::Artifact(
            "spectrum file: header scales disagree with the grid metadata".into(),
        ));
    }
    let data = table
        .cells
        .iter()
        .flatten()
        .map(|c| parse_f64(c, WHAT))
        .collect::<Result<Vec<_>>>()?;
    PowerSpectrum::from_parts(
        Matrix::from_vec(n, scales.len(), data),
        cone_of_influence(n, dt, &params),
        grid,
        params,
        table.dates,
    )
}

/// 0/1 significance matrix in the spectrum layout.
pub fn write_mask<W: Write>(
    spectrum: &PowerSpectrum,
    result: &SignificanceResult,
    out: W,
) -> Result<()> {
    let mut meta = grid_meta(spectrum);
    meta.push(("level", fmt_f64(result.level)));
    write_table(
        out,
        &meta,
        &scale_header(spectrum),
        spectrum.timestamps(),
        (0..result.mask.rows()).map(|t| {
            result
                .mask
                .row(t)
                .iter()
                .map(|&m| if m { "1" } else { "0" }.to_string())
                .collect()
        }),
    )
}

/// Reads a mask file into its dates and boolean matrix.
pub fn read_mask(text: &str) -> Result<(Vec<NaiveDate>, Matrix<bool>)> {
    const WHAT: &str = "mask file";
    let table = read_table(text, WHAT)?;
    let (rows, cols) = (table.dates.len(), table.header.len());
    let data = table
        .cells
        .iter()
        .flatten()
        .map(|c| match c.as_str() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Artifact(format!("{WHAT}: bad cell '{other}'"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((table.dates, Matrix::from_vec(rows, cols, data)))
}

pub fn write_thresholds<W: Write>(
    spectrum: &PowerSpectrum,
    thresholds: &Thresholds,
    mut out: W,
) -> Result<()> {
    writeln!(out, "# level={}", fmt_f64(thresholds.level))?;
    writeln!(out, "# method={}", thresholds.method)?;
    writeln!(out, "# mc_runs={}", thresholds.mc_runs)?;
    writeln!(out, "scale,period,dof,threshold")?;
    let periods = spectrum.grid().periods(spectrum.params());
    for (j, &s) in spectrum.grid().scales().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(s),
            fmt_f64(periods[j]),
            fmt_f64(thresholds.dof[j]),
            fmt_f64(thresholds.values[j])
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a thresholds file; returns the scales alongside.
pub fn read_thresholds(text: &str) -> Result<(Vec<f64>, Thresholds)> {
    const WHAT: &str = "thresholds file";
    let mut meta = BTreeMap::new();
    let mut scales = Vec::new();
    let mut dof = Vec::new();
    let mut values = Vec::new();
    let mut saw_header = false;
    for line in text.lines().filter(|l| !l.is_empty()) {
        if let Some(body) = line.strip_prefix('#') {
            if let Some((k, v)) = body.trim().split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if !saw_header {
            if line != "scale,period,dof,threshold" {
                return Err(Error::Artifact(format!(
                    "{WHAT}: unexpected header '{line}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Artifact(format!("{WHAT}: bad row '{line}'")));
        }
        scales.push(parse_f64(f[0], WHAT)?);
        dof.push(parse_f64(f[2], WHAT)?);
        values.push(parse_f64(f[3], WHAT)?);
    }
    let get = |k: &str| {
        meta.get(k)
            .ok_or_else(|| Error::Artifact(format!("{WHAT}: missing metadata '{k}'")))
    };
    let method = match get("method")?.as_str() {
        "analytic" => NullMethod::Analytic,
        "monte-carlo" => NullMethod::MonteCarlo,
        other => return Err(Error::Artifact(format!("{WHAT}: unknown method '{other}'"))),
    };
    let mc_runs = get("mc_runs")?
        .parse()
        .map_err(|_| Error::Artifact(format!("{WHAT}: bad mc_runs")))?;
    Ok((
        scales,
        Thresholds {
            level: parse_f64(get("level")?, WHAT)?,
            values,
            dof,
            method,
            mc_runs,
        },
    ))
}

/// `date,coi_scale`: the largest reliable scale per time index.
pub fn write_coi<W: Write>(spectrum: &PowerSpectrum, mut out: W) -> Result<()> {
    writeln!(out, "date,coi_scale")?;
    for (d, c) in spectrum.timestamps().iter().zip(spectrum.coi()) {
        writeln!(out, "{},{}", fmt_date(d), fmt_f64(*c))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_coi(text: &str) -> Result<(Vec<NaiveDate>, Vec<f64>)> {
    const WHAT: &str = "coi file";
    let mut lines = text.lines();
    if lines.next() != Some("date,coi_scale") {
        return Err(Error::Artifact(format!(
            "{WHAT}: expected header date,coi_scale"
        )));
    }
    let mut dates = Vec::new();
    let mut coi = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let (d, c) = line
            .split_once(',')
            .ok_or_else(|| Error::Artifact(format!("{WHAT}: bad row '{line}'")))?;
        dates.push(parse_day(d, WHAT)?);
        coi.push(parse_f64(c, WHAT)?);
    }
    Ok((dates, coi))
}

/// Ground-truth burst cells in the spectrum layout, for `simulate` output.
pub fn write_truth_mask<W: Write>(
    dates: &[NaiveDate],
    scales: &[f64],
    mask: &Matrix<bool>,
    out: W,
) -> Result<()> {
    write_table(
        out,
        &[],
        &scales.iter().map(|&s| fmt_f64(s)).collect::<Vec<_>>(),
        dates,
        (0..mask.rows()).map(|t| {
            mask.row(t)
                .iter()
                .map(|&m| if m { "1" } else { "0" }.to_string())
                .collect()
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputInfo {
    pub source: String,
    /// `ohlc` or `returns`.
    pub format: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub symbol: String,
    pub len: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub s0: f64,
    pub dj: f64,
    pub dt: f64,
    pub scales: usize,
    pub max_scale: f64,
    pub fourier_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceInfo {
    pub method: NullMethod,
    pub level: f64,
    pub mc_runs: usize,
    pub summary: MaskSummary,
}

/// Everything needed to reproduce a run, plus digests of what it wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub config: AnalysisConfig,
    pub input: InputInfo,
    pub series: SeriesInfo,
    pub grid: GridInfo,
    pub ar1: Ar1Model,
    pub significance: SignificanceInfo,
    pub render: RenderOptions,
    /// File name to SHA-256 of its contents.
    pub artifacts: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so
/// a reader never sees a half-written file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let tmp = dir.join(format!(".{name}.partial"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

/// The artifacts of one analysis run, read back from disk.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub manifest: Manifest,
    pub series: ReturnSeries,
    pub spectrum: PowerSpectrum,
    pub thresholds: Thresholds,
    pub result: SignificanceResult,
    pub coi: Vec<f64>,
    pub heatmap: Vec<u8>,
}

/// Loads a run directory and checks every file against the manifest's
/// digests and against each other.
pub fn load_run(dir: &Path) -> Result<RunArtifacts> {
    let read = |name: &str| -> Result<Vec<u8>> {
        fs::read(dir.join(name))
            .map_err(|e| Error::Artifact(format!("cannot read {}: {e}", dir.join(name).display())))
    };
    let text = |name: &str| -> Result<String> {
        String::from_utf8(read(name)?).map_err(|_| Error::Artifact(format!("{name} is not UTF-8")))
    };
    let manifest = Manifest::from_json(&text(MANIFEST_FILE)?)?;
    for (name, digest) in &manifest.artifacts {
        if sha256_hex(&read(name)?) != *digest {
            return Err(Error::Artifact(format!(
                "{name} does not match the digest recorded in the manifest"
            )));
        }
    }
    let series = read_returns_csv(text(RETURNS_FILE)?.as_bytes(), &manifest.series.symbol)?;
    let spectrum = read_spectrum(&text(SPECTRUM_FILE)?)?;
    let (scales, thresholds) = read_thresholds(&text(THRESHOLDS_FILE)?)?;
    let (mask_dates, mask) = read_mask(&text(MASK_FILE)?)?;
    let (coi_dates, coi) = read_coi(&text(COI_FILE)?)?;
    let consistent = scales == spectrum.grid().scales()
        && mask_dates == spectrum.timestamps()
        && coi_dates == spectrum.timestamps()
        && series.timestamps() == spectrum.timestamps()
        && mask.cols() == scales.len();
    if !consistent {
        return Err(Error::Artifact(
            "artifact files disagree on dates or scales".into(),
        ));
    }
    let result = SignificanceResult {
        level: thresholds.level,
        thresholds: thresholds.values.clone(),
        dof: thresholds.dof.clone(),
        mask,
        reliable: spectrum.reliable_mask(),
        method: thresholds.method,
        mc_runs: thresholds.mc_runs,
    };
    Ok(RunArtifacts {
        manifest,
        series,
        spectrum,
        thresholds,
        result,
        coi,
        heatmap: read(HEATMAP_FILE)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, 2f64.powf(1.0 / 12.0)] {
            assert_eq!(parse_f64(&fmt_f64(v), "t").unwrap(), v);
        }
    }

    #[test]
    fn table_rejects_ragged_rows() {
        let text = "# a=1\ndate,1,2\n2000-01-03,1,2\n2000-01-04,1\n";
        assert!(read_table(text, "t").is_err());
        assert!(read_table("x,1\n", "t").is_err());
    }
}

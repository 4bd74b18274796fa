use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use cwt_spectra::data::ColumnSchema;
use cwt_spectra::pipeline::{
    render_run, run_analysis, run_simulation, AnalysisConfig, SimulationConfig, SimulationKind,
};
use cwt_spectra::render::RenderOptions;
use cwt_spectra::selftest::run_selftest;
use cwt_spectra::significance::NullMethod;
use cwt_spectra::synthetic::BurstSpec;
use cwt_spectra::{Error, ErrorKind};

const THREADS_ENV: &str = "CWT_SPECTRA_THREADS";

#[derive(Parser)]
#[command(
    name = "cwt-spectra",
    version,
    about = "Wavelet power spectra of daily return series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform a price or returns file and test it against red noise
    Analyze(AnalyzeArgs),
    /// Write a synthetic returns series
    Simulate(SimulateArgs),
    /// Re-render the heatmap of an analysis directory
    Render(RenderArgs),
    /// Run the built-in oracle, round-trip and calibration checks
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum NullArg {
    Analytic,
    Mc,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// OHLC or returns CSV: a file path or an http(s) URL
    #[arg(long, value_name = "PATH|URL")]
    input: String,
    #[arg(long, value_name = "YYYY-MM-DD")]
    date_from: Option<NaiveDate>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    date_to: Option<NaiveDate>,
    #[arg(long, default_value_t = 6.0)]
    omega0: f64,
    #[arg(long, default_value_t = 2.0)]
    s0: f64,
    #[arg(long, default_value_t = 1.0 / 12.0)]
    dj: f64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long = "null", value_enum, default_value = "analytic")]
    null: NullArg,
    #[arg(long, default_value_t = 1000)]
    mc_runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value = "Date")]
    date_col: String,
    #[arg(long, default_value = "Open")]
    open_col: String,
    /// Empty string to read files without a high column
    #[arg(long, default_value = "High")]
    high_col: String,
    /// Empty string to read files without a low column
    #[arg(long, default_value = "Low")]
    low_col: String,
    #[arg(long, default_value = "Close")]
    close_col: String,
    /// Seconds per HTTP attempt
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    /// Total HTTP attempts
    #[arg(long, default_value_t = 3)]
    retries: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ar1,
    Burst,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "ar1")]
    kind: KindArg,
    #[arg(long, default_value_t = 2048)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1000)]
    burst_start: usize,
    #[arg(long, default_value_t = 1060)]
    burst_end: usize,
    #[arg(long, default_value_t = 2.0)]
    band_min: f64,
    #[arg(long, default_value_t = 8.0)]
    band_max: f64,
    #[arg(long, default_value_t = 4.0)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    s0: f64,
    #[arg(long, default_value_t = 1.0 / 12.0)]
    dj: f64,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Directory written by `analyze`
    #[arg(long, value_name = "DIR")]
    run: PathBuf,
    /// Output PNG path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    cell_width: u32,
    #[arg(long, default_value_t = 4)]
    cell_height: u32,
    #[arg(long)]
    no_contour: bool,
    #[arg(long)]
    no_coi: bool,
}

fn optional(name: String) -> Option<String> {
    (!name.is_empty()).then_some(name)
}

fn analyze(a: AnalyzeArgs) -> Result<(), Error> {
    let config = AnalysisConfig {
        input: a.input,
        schema: ColumnSchema {
            date: a.date_col,
            open: a.open_col,
            high: optional(a.high_col),
            low: optional(a.low_col),
            close: a.close_col,
        },
        date_from: a.date_from,
        date_to: a.date_to,
        omega0: a.omega0,
        s0: a.s0,
        dj: a.dj,
        level: a.level,
        null_method: match a.null {
            NullArg::Analytic => NullMethod::Analytic,
            NullArg::Mc => NullMethod::MonteCarlo,
        },
        mc_runs: a.mc_runs,
        seed: a.seed,
        fetch_timeout_secs: a.timeout,
        fetch_retries: a.retries,
        out_dir: a.out,
    };
    let report = run_analysis(&config)?;
    let m = &report.manifest;
    let s = m.significance.summary;
    println!(
        "{}: {} returns {}..{}, {} scales, AR(1) phi {:.4}",
        m.series.symbol,
        m.series.len,
        m.series.first_date,
        m.series.last_date,
        m.grid.scales,
        m.ar1.phi()
    );
    println!(
        "{} null at {}: {} of {} inside-COI cells significant ({:.2}%)",
        m.significance.method,
        m.significance.level,
        s.reliable_significant,
        s.reliable,
        100.0 * s.reliable_significant as f64 / s.reliable.max(1) as f64
    );
    println!("wrote {}", report.out_dir.display());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Error> {
    let kind = match a.kind {
        KindArg::Ar1 => SimulationKind::Ar1,
        KindArg::Burst => SimulationKind::Burst,
    };
    let config = SimulationConfig {
        kind,
        n: a.n,
        phi: a.phi,
        sigma: a.sigma,
        burst: (kind == SimulationKind::Burst).then_some(BurstSpec {
            start: a.burst_start,
            end: a.burst_end,
            min_period: a.band_min,
            max_period: a.band_max,
            amplitude_ratio: a.ratio,
        }),
        seed: a.seed,
        omega0: 6.0,
        s0: a.s0,
        dj: a.dj,
        out_dir: a.out.clone(),
    };
    let files = run_simulation(&config)?;
    println!("wrote {} to {}", files.join(", "), a.out.display());
    Ok(())
}

fn render(a: RenderArgs) -> Result<(), Error> {
    let options = RenderOptions {
        cell_width: a.cell_width,
        cell_height: a.cell_height,
        draw_contour: !a.no_contour,
        shade_coi: !a.no_coi,
        ..RenderOptions::default()
    };
    render_run(&a.run, &options, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input | ErrorKind::Io => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Network => 4,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Render(a) => render(a),
        Command::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::from(3);
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

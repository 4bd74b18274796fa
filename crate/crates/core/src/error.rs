use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Network,
    Io,
}

/// Every failure carries the module it originated in as a message prefix.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelet: {0}")]
    InvalidParams(String),

    #[error("wavelet: series length {len} is below the minimum of {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("wavelet: series of length {series} does not match a grid built for length {grid}")]
    LengthMismatch { series: usize, grid: usize },

    #[error("wavelet: non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("wavelet: direct transform is limited to {max} samples, got {len}")]
    OracleBudget { len: usize, max: usize },

    #[error("wavelet: scale step dj = {dj} is too coarse for reconstruction (needs dj <= 0.25)")]
    GridTooCoarse { dj: f64 },

    #[error("wavelet: quadrature did not converge ({0})")]
    Quadrature(String),

    #[error("significance: {0}")]
    Significance(String),

    #[error("significance: dimension mismatch, spectrum has {spectrum} scales but {thresholds} thresholds were given")]
    DimensionMismatch { spectrum: usize, thresholds: usize },

    #[error("data-io: {0}")]
    Data(String),

    #[error("data-io: duplicate date {0}")]
    DuplicateDate(chrono::NaiveDate),

    #[error("data-io: empty series")]
    EmptySeries,

    #[error("data-io: HTTP status {status} from {url}")]
    HttpStatus { status: u16, url: String },

    #[error("data-io: network failure after {attempts} attempt(s): {message}")]
    Network { attempts: usize, message: String },

    #[error("synthetic: {0}")]
    Synthetic(String),

    #[error("render: {0}")]
    Render(String),

    #[error("artifacts: {0}")]
    Artifact(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("data-io: csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("artifacts: json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("render: image encoding: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invariant(_) | Error::Quadrature(_) => ErrorKind::Numerical,
            Error::HttpStatus { .. } | Error::Network { .. } => ErrorKind::Network,
            Error::Io(_) | Error::Image(_) => ErrorKind::Io,
            _ => ErrorKind::Input,
        }
    }
}

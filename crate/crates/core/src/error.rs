use crate::C64;

/// Errors raised by the numerical pipeline and the configuration layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("point z = {z} lies outside the sector |arg z| < {alpha}")]
    OutsideSector { z: C64, alpha: f64 },

    #[error("scaling parameter {lambda} lies outside the disc |λ| < sin α = {radius}")]
    OutsideDisc { lambda: C64, radius: f64 },

    #[error("degenerate metric at (x, y) = ({x}, {y}): |det| = {det_abs:e}")]
    DegenerateMetric { x: f64, y: f64, det_abs: f64 },

    #[error("μ = {mu} is at the spectrum of the pencil ({detail})")]
    AtSpectrum { mu: C64, detail: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

use std::path::PathBuf;

/// Crate-wide error type.
///
/// Ingest errors carry enough context (file, line, frame) to locate the
/// offending input; numeric errors name the violated precondition.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid viewing geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: frame {frame}: {reason}")]
    InvalidFrame {
        path: PathBuf,
        frame: usize,
        reason: String,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("center-bias fit error: {0}")]
    Fit(String),

    #[error("gaze point ({x}, {y}) outside {w}x{h} map")]
    OutOfBounds { x: f64, y: f64, w: usize, h: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! File formats and command plumbing for the fatigue recognition pipeline.
//!
//! Three formats, all UTF-8 with LF line endings:
//!
//! - **Streams** are JSONL: one frame record per line with a strictly
//!   increasing timestamp, optional 68-point landmarks, head pose angles,
//!   an optional precomputed feature vector, and an optional label.
//! - **Datasets** are CSV: a `#` header line carrying the window geometry
//!   (n, k, stride, fps), a column-name row, then one row per sample with
//!   the label followed by the row-major 4 x L matrix.
//! - **Checkpoints** are a self-describing text format: hyperparameters,
//!   then each tensor's name, shape, and decimal values. Floats print in
//!   shortest round-trip form, so a load-store cycle is bit-exact.

pub mod bench;
pub mod checkpoint;
pub mod dataset;
pub mod report;
pub mod stream;

use thiserror::Error;

/// Errors split by exit-code class: usage errors exit 1, data errors 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn data(err: impl std::fmt::Display) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<fatigue_core::Error> for CliError {
    fn from(err: fatigue_core::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

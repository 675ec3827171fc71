//! Seeded benchmark harness for pseudo-label selection criteria.
//!
//! An experiment runs every configured criterion on every seed, with all
//! criteria of one seed sharing the same labeled/unlabeled/test split, and
//! reports test accuracy against the supervised baseline fitted on the
//! labeled rows alone.

pub mod config;
pub mod experiment;
pub mod summary;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ExperimentResult, RunOptions, RunRecord, RunStatus};
pub use summary::{summarize, summarize_dir, SummaryRow};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed results file, line {line}: {message}")]
    Results { line: usize, message: String },
    #[error("no successful runs to summarize")]
    NoSuccessfulRuns,
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

/// Formats a real with 12 significant digits, dropping trailing zeros.
pub fn sig12(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let rounded: f64 = format!("{value:.11e}").parse().expect("valid float");
    rounded.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_rounds_and_trims() {
        assert_eq!(sig12(0.85), "0.85");
        assert_eq!(sig12(0.5f64.sqrt() / 10.0), "0.0707106781187");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0123456789012345), "-0.0123456789012");
    }
}

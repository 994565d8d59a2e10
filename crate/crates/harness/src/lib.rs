//! Replicated experiments, statistics and result files for the `iemo`
//! optimizers.

use std::path::{Path, PathBuf};

pub mod experiment;
pub mod output;
pub mod stats;

pub use experiment::{
    run_experiment, run_sweep, Arm, Comparison, ExperimentSummary, Precision, StoredRun, SweepOptions,
    SweepParam,
};
pub use stats::{median, iqr, wilcoxon_signed_rank, Summary, Wilcoxon};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] iemo::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

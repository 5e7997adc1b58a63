//! Experiment orchestration: bound reports, training curves, Monte-Carlo
//! validation and timing, written as CSV with a hashed MANIFEST.

pub mod bench;
pub mod config;
pub mod gnuplot;
pub mod instance;
pub mod report;
pub mod run;

use std::path::PathBuf;

pub use bench::{bench_bounds, time_instance, time_min, write_timing_csv, TimingRow};
pub use config::{BoundMethod, ExperimentConfig, SweepEntry};
pub use instance::{load_task, Instance, TaskSource};
pub use report::{moving_average, sha256_file, write_manifest, write_run, BoundRow};
pub use run::{
    mc_validation, run_case, run_seed, training_summary, CaseReport, McRow, RunOptions,
    TrainingSummary,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Parse(#[from] crate::twtl::ParseError),
    #[error(transparent)]
    Translate(#[from] crate::twtl::TranslateError),
    #[error(transparent)]
    Fsa(#[from] crate::twtl::FsaError),
    #[error(transparent)]
    Product(#[from] crate::product::ProductError),
    #[error(transparent)]
    Bound(#[from] crate::reachability::BoundError),
    #[error(transparent)]
    Train(#[from] crate::switching::TrainError),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        source: Box<HarnessError>,
    },
}

//! Experiment orchestration, statistics and the human review service.

mod config;
mod ratings;
mod replay;
mod report;
mod review;
mod run;
mod sample;
pub mod stats;

use std::path::PathBuf;

pub use config::{Mode, ResolvedConfig, RunConfig};
pub use ratings::{parse_ratings, resolutions, resolve, Judgment, RatingError, RatingRecord, Resolution};
pub use replay::{pack_replay, response_path};
pub use report::{compute_report, sample_correct, CategoryReport, CellReport, ComplexityTest, EvalReport, Score};
pub use review::{review_router, serve_review, status_of, submit_rating, SampleDetail, SampleSummary};
pub use run::{generator_for, load_run, refresh_report, run_experiment, sample_dir, write_report, Run, RATINGS_FILE};
pub use sample::{check_code, parse_sample_id, sample_id, Checked, GenerationSample, SampleError, WellFormed};
pub use stats::{
    aggregate_pass_at_k, pass_at_k, pass_at_k_exact, wilcoxon_one_sided, EvalCounts, Pooling, StatsError, WilcoxonResult,
};

use crate::llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("run directory {0} already holds a run")]
    RunExists(PathBuf),
    #[error("run directory is corrupt: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Rating(#[from] RatingError),
}

impl HarnessError {
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config-error",
            HarnessError::RunExists(_) => "run-exists",
            HarnessError::Corrupt(_) => "corrupt-run",
            HarnessError::Io(_) => "io-error",
            HarnessError::Llm(e) => e.code(),
            HarnessError::Rating(e) => e.code(),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

/// Applies `ratings` to a loaded run and returns the updated report.
/// Conflicting judgments without adjudication stay pending and out of `c`.
pub fn merge_ratings(run: &mut Run, ratings: Vec<RatingRecord>) -> Result<EvalReport, RatingError> {
    for r in ratings {
        submit_rating(run, r)?;
    }
    Ok(run.report())
}

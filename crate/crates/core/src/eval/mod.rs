//! Evaluation harness: ranking metrics, dataset evaluation against
//! ground-truth manifests, fusion-weight sweeps, and paired statistical
//! comparison of pipeline variants.

mod harness;
mod metrics;
mod patch;
mod wilcoxon;

pub use harness::{
    alpha_sweep, default_alpha_grid, evaluate_dataset, ground_truth, load_manifest, EvalConfig,
    EvalReport, GroundTruth, ManifestEntry, PackageMetrics, SweepRow, Variant, TOP_NS,
};
pub use metrics::{accuracy_at, average_precision, precision_at, recall_at};
pub use patch::changed_files;
pub use wilcoxon::{wilcoxon_signed_rank, PValueMethod, WilcoxonResult, WILCOXON_EXACT_MAX_N};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth must not be empty")]
    EmptyTruth,
    #[error("paired samples differ in length ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("too few nonzero pairs for the signed-rank test ({n} < {min})")]
    TooFewPairs { n: usize, min: usize },
    #[error("alpha {0} lies outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path} line {line}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("package {id}: {message}")]
    Package { id: String, message: String },
}

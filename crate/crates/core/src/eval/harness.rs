//! Dataset evaluation: load ground-truth manifests, run the pipeline per
//! package, and aggregate ranking metrics across packages.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{accuracy_at, average_precision, precision_at, recall_at};
use super::patch::changed_files;
use super::EvalError;
use crate::corpus::{ingest_tree, IngestOptions};
use crate::ranker::{prepare, Localization, PipelineOptions, RankedList};

/// The Top-N cutoffs reported per package.
pub const TOP_NS: [usize; 3] = [1, 5, 10];

/// Which stages of the pipeline participate in the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Rule filter alone: the ranking is the matched set, in path order.
    RuleFilterOnly,
    /// Similarity to the basic query alone (no augmentation, alpha = 0).
    RetrievalOnly,
    /// Similarity to the augmented query (alpha = 0).
    AugmentedRetrieval,
    /// The weighted fusion of rule filter and augmented retrieval.
    #[default]
    Full,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hf" => Ok(Self::RuleFilterOnly),
            "fr" => Ok(Self::RetrievalOnly),
            "fr+qa" => Ok(Self::AugmentedRetrieval),
            "full" => Ok(Self::Full),
            other => Err(format!(
                "unknown variant {other:?} (expected hf, fr, fr+qa, or full)"
            )),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RuleFilterOnly => "hf",
            Self::RetrievalOnly => "fr",
            Self::AugmentedRetrieval => "fr+qa",
            Self::Full => "full",
        })
    }
}

/// One dataset record: where a package's inputs live and which files the
/// fixing patch touched.
#[derive(Debug, Clone, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source_dir: PathBuf,
    pub diff_log: PathBuf,
    pub build_log: PathBuf,
    /// Problematic file paths, relative to `source_dir`.
    #[serde(default)]
    pub truth: Vec<String>,
    /// Alternatively, a unified-diff patch whose touched files are the truth.
    #[serde(default)]
    pub patch: Option<PathBuf>,
}

/// Load a manifest: one JSON object per line, `#` comments and blank lines
/// skipped. Relative paths are resolved against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, EvalError> {
    let raw = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut entry: ManifestEntry =
            serde_json::from_str(line).map_err(|err| EvalError::Manifest {
                path: path.to_path_buf(),
                line: i + 1,
                message: err.to_string(),
            })?;
        entry.source_dir = resolve(base, &entry.source_dir);
        entry.diff_log = resolve(base, &entry.diff_log);
        entry.build_log = resolve(base, &entry.build_log);
        entry.patch = entry.patch.map(|p| resolve(base, &p));
        entries.push(entry);
    }
    Ok(entries)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// The problematic files of one package, normalized to corpus path form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub package_id: String,
    pub problematic_files: BTreeSet<String>,
}

/// Truth paths use the same form as corpus paths: relative, `/`-separated,
/// no leading `./` or `/`.
fn normalize_truth_path(path: &str) -> String {
    let mut p = path.trim();
    loop {
        if let Some(rest) = p.strip_prefix("./") {
            p = rest;
        } else if let Some(rest) = p.strip_prefix('/') {
            p = rest;
        } else {
            break;
        }
    }
    p.to_string()
}

/// Resolve a manifest entry's ground truth, from its explicit list or from
/// the files touched by its patch.
pub fn ground_truth(entry: &ManifestEntry) -> Result<GroundTruth, EvalError> {
    let mut problematic_files: BTreeSet<String> = entry
        .truth
        .iter()
        .map(|p| normalize_truth_path(p))
        .filter(|p| !p.is_empty())
        .collect();
    if let Some(patch_path) = &entry.patch {
        let raw = fs::read(patch_path).map_err(|source| EvalError::Io {
            path: patch_path.clone(),
            source,
        })?;
        let text = String::from_utf8_lossy(&raw);
        problematic_files.extend(
            changed_files(&text)
                .into_iter()
                .map(|p| normalize_truth_path(&p)),
        );
    }
    if problematic_files.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    Ok(GroundTruth {
        package_id: entry.id.clone(),
        problematic_files,
    })
}

/// How to run the pipeline over a dataset.
#[derive(Debug, Clone, Default)]
pub struct EvalConfig {
    pub variant: Variant,
    pub alpha: f64,
    pub ingest: IngestOptions,
    pub pipeline: PipelineOptions,
}

impl EvalConfig {
    pub fn new(variant: Variant, alpha: f64) -> Self {
        Self {
            variant,
            alpha,
            ..Self::default()
        }
    }
}

/// A@{1,5,10}, P@{1,5,10}, R@{1,5,10}, and AP for one package, or their
/// arithmetic means across packages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PackageMetrics {
    pub accuracy: [f64; 3],
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub avg_precision: f64,
}

/// Metric outcomes over a dataset. Packages that failed to evaluate are
/// listed in `failures` and excluded from the aggregate.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub per_package: BTreeMap<String, PackageMetrics>,
    pub failures: BTreeMap<String, String>,
    /// Arithmetic mean of each per-package metric; `avg_precision` is the
    /// mean average precision.
    pub aggregate: PackageMetrics,
    pub n_packages: usize,
}

fn package_metrics(ranked: &[String], truth: &BTreeSet<String>) -> Result<PackageMetrics, EvalError> {
    let mut m = PackageMetrics {
        avg_precision: average_precision(ranked, truth)?,
        ..PackageMetrics::default()
    };
    for (i, &n) in TOP_NS.iter().enumerate() {
        m.accuracy[i] = f64::from(accuracy_at(ranked, truth, n));
        m.precision[i] = precision_at(ranked, truth, n);
        m.recall[i] = recall_at(ranked, truth, n)?;
    }
    Ok(m)
}

fn aggregate_metrics(per_package: &BTreeMap<String, PackageMetrics>) -> PackageMetrics {
    let mut agg = PackageMetrics::default();
    if per_package.is_empty() {
        return agg;
    }
    for m in per_package.values() {
        for i in 0..TOP_NS.len() {
            agg.accuracy[i] += m.accuracy[i];
            agg.precision[i] += m.precision[i];
            agg.recall[i] += m.recall[i];
        }
        agg.avg_precision += m.avg_precision;
    }
    let n = per_package.len() as f64;
    for i in 0..TOP_NS.len() {
        agg.accuracy[i] /= n;
        agg.precision[i] /= n;
        agg.recall[i] /= n;
    }
    agg.avg_precision /= n;
    agg
}

fn read_log(path: &Path) -> Result<String, EvalError> {
    let raw = fs::read(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(String::from_utf8_lossy(&raw).into_owned())
}

fn package_error(id: &str, message: impl ToString) -> EvalError {
    EvalError::Package {
        id: id.to_string(),
        message: message.to_string(),
    }
}

/// Ingest one package and run the alpha-independent pipeline stages.
fn prepare_package(
    entry: &ManifestEntry,
    config: &EvalConfig,
    augment_top_k: usize,
) -> Result<(Localization, GroundTruth), EvalError> {
    let truth = ground_truth(entry).map_err(|e| package_error(&entry.id, e))?;
    let corpus = ingest_tree(&entry.source_dir, &config.ingest)
        .map_err(|e| package_error(&entry.id, e))?;
    let diff_log = read_log(&entry.diff_log).map_err(|e| package_error(&entry.id, e))?;
    let build_log = read_log(&entry.build_log).map_err(|e| package_error(&entry.id, e))?;
    let options = PipelineOptions {
        augment_top_k,
        ..config.pipeline.clone()
    };
    let localization = prepare(&corpus, &diff_log, &build_log, &options)
        .map_err(|e| package_error(&entry.id, e))?;
    Ok((localization, truth))
}

fn variant_ranking(
    localization: &Localization,
    variant: Variant,
    alpha: f64,
) -> Result<RankedList, EvalError> {
    let ranked = match variant {
        Variant::Full => localization.rank(alpha),
        Variant::AugmentedRetrieval | Variant::RetrievalOnly => localization.rank(0.0),
        Variant::RuleFilterOnly => localization.rank(1.0).map(|mut list| {
            // The rule filter produces a set; only matched files enter the list.
            list.entries.retain(|e| e.hf_matched);
            list
        }),
    };
    ranked.map_err(|e| EvalError::Package {
        id: String::new(),
        message: e.to_string(),
    })
}

fn variant_top_k(variant: Variant, configured: usize) -> usize {
    match variant {
        // No query augmentation for the basic-query and rule-only variants.
        Variant::RetrievalOnly | Variant::RuleFilterOnly => 0,
        Variant::AugmentedRetrieval | Variant::Full => configured,
    }
}

/// Evaluate every manifest entry and aggregate the metrics. Packages that
/// fail to load or rank are recorded in the report and skipped.
pub fn evaluate_dataset(entries: &[ManifestEntry], config: &EvalConfig) -> EvalReport {
    if !(0.0..=1.0).contains(&config.alpha) {
        // Surface the bad weight on every package rather than panic.
        let failures = entries
            .iter()
            .map(|e| (e.id.clone(), format!("alpha {} lies outside [0, 1]", config.alpha)))
            .collect();
        return EvalReport {
            failures,
            ..EvalReport::default()
        };
    }
    let k = variant_top_k(config.variant, config.pipeline.augment_top_k);
    let mut report = EvalReport::default();
    for entry in entries {
        let outcome = prepare_package(entry, config, k).and_then(|(localization, truth)| {
            let ranked = variant_ranking(&localization, config.variant, config.alpha)?;
            package_metrics(&ranked.paths(), &truth.problematic_files)
                .map_err(|e| package_error(&entry.id, e))
        });
        match outcome {
            Ok(metrics) => {
                report.per_package.insert(entry.id.clone(), metrics);
            }
            Err(err) => {
                log::warn!("excluding package {}: {err}", entry.id);
                report.failures.insert(entry.id.clone(), err.to_string());
            }
        }
    }
    report.n_packages = report.per_package.len();
    report.aggregate = aggregate_metrics(&report.per_package);
    report
}

/// One row of a fusion-weight sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub accuracy_at_10: f64,
    pub precision_at_10: f64,
    pub recall_at_10: f64,
    pub map: f64,
}

/// The grid 0.1, 0.2, ..., 0.9.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=9).map(|i| f64::from(i) / 10.0).collect()
}

/// Evaluate the full pipeline at each weight in `alphas`; per-package
/// ingestion, query building, similarity, and rule scanning run once and
/// are shared across all weights.
pub fn alpha_sweep(
    entries: &[ManifestEntry],
    config: &EvalConfig,
    alphas: &[f64],
) -> Result<Vec<SweepRow>, EvalError> {
    for &alpha in alphas {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(EvalError::InvalidAlpha(alpha));
        }
    }
    let k = variant_top_k(Variant::Full, config.pipeline.augment_top_k);
    let mut packages = Vec::new();
    for entry in entries {
        match prepare_package(entry, config, k) {
            Ok(prepared) => packages.push(prepared),
            Err(err) => log::warn!("excluding package {}: {err}", entry.id),
        }
    }

    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut sum = SweepRow {
            alpha,
            accuracy_at_10: 0.0,
            precision_at_10: 0.0,
            recall_at_10: 0.0,
            map: 0.0,
        };
        for (localization, truth) in &packages {
            let ranked = localization
                .rank(alpha)
                .map_err(|e| package_error(&truth.package_id, e))?;
            let paths = ranked.paths();
            sum.accuracy_at_10 += f64::from(accuracy_at(&paths, &truth.problematic_files, 10));
            sum.precision_at_10 += precision_at(&paths, &truth.problematic_files, 10);
            sum.recall_at_10 += recall_at(&paths, &truth.problematic_files, 10)?;
            sum.map += average_precision(&paths, &truth.problematic_files)?;
        }
        if !packages.is_empty() {
            let n = packages.len() as f64;
            sum.accuracy_at_10 /= n;
            sum.precision_at_10 /= n;
            sum.recall_at_10 /= n;
            sum.map /= n;
        }
        rows.push(sum);
    }
    Ok(rows)
}

//! Configuration resolution: command-line flags and environment variables
//! override the optional TOML config file, which overrides built-in
//! defaults.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use serde::Deserialize;

use buildloc_core::corpus::IngestOptions;
use buildloc_core::logparse::{
    LogPatterns, DEFAULT_DIFF_HEADER_REGEX, DEFAULT_ENTER_REGEX, DEFAULT_LEAVE_REGEX,
};
use buildloc_core::ranker::{PipelineOptions, DEFAULT_ALPHA, DEFAULT_AUGMENT_TOP_K};
use buildloc_core::rules::{builtin_rules, combined_rules, load_rules_file, Rule};
use buildloc_core::vsm::WeightScheme;

use crate::{input_error, CliError};

/// Keys accepted in the TOML config file; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    pub alpha: Option<f64>,
    pub top: Option<usize>,
    pub weighting: Option<String>,
    pub augment_top_k: Option<usize>,
    pub format: Option<String>,
    pub variant: Option<String>,
    pub rules_file: Option<PathBuf>,
    pub enter_regex: Option<String>,
    pub leave_regex: Option<String>,
    pub diff_header_regex: Option<String>,
    pub max_file_size: Option<u64>,
    pub include: Option<Vec<String>>,
    pub exclude: Option<Vec<String>>,
    pub follow_symlinks: Option<bool>,
}

pub fn load_file(path: Option<&Path>) -> Result<FileSettings, CliError> {
    let Some(path) = path else {
        return Ok(FileSettings::default());
    };
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("failed to read config file {}", path.display()))
        .map_err(input_error)?;
    toml::from_str(&raw)
        .with_context(|| format!("failed to parse config file {}", path.display()))
        .map_err(input_error)
}

/// Pipeline and ingestion flags shared by the ranking commands.
#[derive(Args, Debug, Default)]
pub struct PipelineFlags {
    /// Fusion weight in [0,1]: 0 ranks purely by similarity, 1 purely by
    /// rule hits
    #[arg(long, env = "BUILDLOC_ALPHA")]
    pub alpha: Option<f64>,

    /// Term weighting scheme
    #[arg(long, env = "BUILDLOC_WEIGHTING", value_parser = ["paper", "log-idf"])]
    pub weighting: Option<String>,

    /// Number of top command segments appended to the query
    #[arg(long, env = "BUILDLOC_AUGMENT_TOP_K")]
    pub augment_top_k: Option<usize>,

    /// TOML file with additional rules (ids >= 100)
    #[arg(long, env = "BUILDLOC_RULES_FILE")]
    pub rules_file: Option<PathBuf>,

    /// Override the directory-enter marker regex
    #[arg(long, env = "BUILDLOC_ENTER_REGEX")]
    pub enter_regex: Option<String>,

    /// Override the directory-leave marker regex
    #[arg(long, env = "BUILDLOC_LEAVE_REGEX")]
    pub leave_regex: Option<String>,

    /// Override the diff-log header regex
    #[arg(long, env = "BUILDLOC_DIFF_HEADER_REGEX")]
    pub diff_header_regex: Option<String>,

    /// Skip files larger than this many bytes
    #[arg(long, env = "BUILDLOC_MAX_FILE_SIZE")]
    pub max_file_size: Option<u64>,

    /// Only ingest paths matching these globs (repeatable)
    #[arg(long)]
    pub include: Vec<String>,

    /// Skip paths matching these globs (repeatable)
    #[arg(long)]
    pub exclude: Vec<String>,

    /// Follow symbolic links while walking the source tree
    #[arg(long, env = "BUILDLOC_FOLLOW_SYMLINKS")]
    pub follow_symlinks: bool,
}

/// Fully resolved pipeline configuration.
pub struct Resolved {
    pub alpha: f64,
    pub pipeline: PipelineOptions,
    pub ingest: IngestOptions,
}

pub fn resolve(flags: &PipelineFlags, file: &FileSettings) -> Result<Resolved, CliError> {
    let alpha = flags.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(0.0..=1.0).contains(&alpha) {
        return Err(input_error(anyhow!("--alpha must lie in [0, 1], got {alpha}")));
    }

    let scheme = match flags.weighting.as_deref().or(file.weighting.as_deref()) {
        None => WeightScheme::default(),
        Some(s) => s.parse::<WeightScheme>().map_err(|e| input_error(anyhow!(e)))?,
    };

    let augment_top_k = flags
        .augment_top_k
        .or(file.augment_top_k)
        .unwrap_or(DEFAULT_AUGMENT_TOP_K);

    let diff_header = flags
        .diff_header_regex
        .as_deref()
        .or(file.diff_header_regex.as_deref())
        .unwrap_or(DEFAULT_DIFF_HEADER_REGEX);
    let enter = flags
        .enter_regex
        .as_deref()
        .or(file.enter_regex.as_deref())
        .unwrap_or(DEFAULT_ENTER_REGEX);
    let leave = flags
        .leave_regex
        .as_deref()
        .or(file.leave_regex.as_deref())
        .unwrap_or(DEFAULT_LEAVE_REGEX);
    let patterns = LogPatterns::new(diff_header, enter, leave).map_err(input_error)?;

    let rules = resolve_rules(flags.rules_file.as_deref().or(file.rules_file.as_deref()))?;

    let mut ingest = IngestOptions::default();
    if let Some(cap) = flags.max_file_size.or(file.max_file_size) {
        ingest.max_file_size = cap;
    }
    ingest.include = if flags.include.is_empty() {
        file.include.clone().unwrap_or_default()
    } else {
        flags.include.clone()
    };
    ingest.exclude = if flags.exclude.is_empty() {
        file.exclude.clone().unwrap_or_default()
    } else {
        flags.exclude.clone()
    };
    ingest.follow_symlinks = flags.follow_symlinks || file.follow_symlinks.unwrap_or(false);

    Ok(Resolved {
        alpha,
        pipeline: PipelineOptions {
            scheme,
            augment_top_k,
            patterns,
            rules,
        },
        ingest,
    })
}

pub fn resolve_rules(rules_file: Option<&Path>) -> Result<Vec<Rule>, CliError> {
    match rules_file {
        None => Ok(builtin_rules()),
        Some(path) => {
            let custom = load_rules_file(path).map_err(input_error)?;
            combined_rules(custom).map_err(input_error)
        }
    }
}

/// Output rendering selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Tsv,
    Json,
}

pub fn resolve_format(
    flag: Option<&str>,
    file: &FileSettings,
) -> Result<OutputFormat, CliError> {
    match flag.or(file.format.as_deref()) {
        None => Ok(OutputFormat::default()),
        Some("tsv") => Ok(OutputFormat::Tsv),
        Some("json") => Ok(OutputFormat::Json),
        Some(other) => Err(input_error(anyhow!(
            "unknown format {other:?} (expected tsv or json)"
        ))),
    }
}

/// Round to the 4 decimal places used in every rendered score.
pub fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

//! `buildloc locate`: rank one package's files and print the top N with
//! scores, rule-filter flags, and per-line rule evidence.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use serde::Serialize;

use buildloc_core::corpus::ingest_tree;
use buildloc_core::ranker::prepare;

use crate::settings::{resolve, resolve_format, round4, FileSettings, OutputFormat, PipelineFlags};
use crate::{input_error, internal_error, CliResult};

#[derive(Args, Debug)]
pub struct LocateArgs {
    /// Package source tree
    pub source_dir: PathBuf,

    /// Diff log produced by comparing the two built binaries
    #[arg(long)]
    pub diff_log: PathBuf,

    /// Build log (either build's log works)
    #[arg(long)]
    pub build_log: PathBuf,

    /// Number of files to print
    #[arg(long = "top", env = "BUILDLOC_TOP")]
    pub top: Option<usize>,

    /// Output format
    #[arg(long, env = "BUILDLOC_FORMAT", value_parser = ["tsv", "json"])]
    pub format: Option<String>,

    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Serialize)]
struct JsonEvidence<'a> {
    rule: &'a str,
    line: usize,
}

#[derive(Serialize)]
struct JsonEntry<'a> {
    rank: usize,
    path: &'a str,
    score: f64,
    hf_matched: bool,
    evidence: Vec<JsonEvidence<'a>>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    alpha: f64,
    top: usize,
    entries: Vec<JsonEntry<'a>>,
}

fn read_log(path: &Path) -> Result<String, crate::CliError> {
    let raw = std::fs::read(path)
        .with_context(|| format!("failed to read log {}", path.display()))
        .map_err(input_error)?;
    Ok(String::from_utf8_lossy(&raw).into_owned())
}

pub fn run(args: LocateArgs, file: &FileSettings) -> CliResult {
    let resolved = resolve(&args.pipeline, file)?;
    let format = resolve_format(args.format.as_deref(), file)?;
    let top = args.top.or(file.top).unwrap_or(10);
    if top == 0 {
        return Err(input_error(anyhow!("--top must be at least 1")));
    }

    let corpus = ingest_tree(&args.source_dir, &resolved.ingest).map_err(input_error)?;
    let diff_log = read_log(&args.diff_log)?;
    let build_log = read_log(&args.build_log)?;

    let localization = prepare(&corpus, &diff_log, &build_log, &resolved.pipeline)
        .map_err(input_error)?;
    let ranked = localization.rank(resolved.alpha).map_err(internal_error)?;

    let rule_names: HashMap<u32, &str> = resolved
        .pipeline
        .rules
        .iter()
        .map(|r| (r.id, r.name.as_str()))
        .collect();
    let evidence: HashMap<&str, &[(u32, usize)]> = localization
        .rule_matches()
        .iter()
        .map(|m| (m.path.as_str(), m.lines.as_slice()))
        .collect();

    let shown = &ranked.entries[..ranked.entries.len().min(top)];
    match format {
        OutputFormat::Tsv => {
            println!("rank\tpath\tscore\thf\trules");
            for (i, entry) in shown.iter().enumerate() {
                let lines = evidence.get(entry.path.as_str()).copied().unwrap_or(&[]);
                let rules = if lines.is_empty() {
                    "-".to_string()
                } else {
                    lines
                        .iter()
                        .map(|(id, line)| {
                            format!("{}:{line}", rule_names.get(id).copied().unwrap_or("?"))
                        })
                        .collect::<Vec<_>>()
                        .join(";")
                };
                println!(
                    "{}\t{}\t{:.4}\t{}\t{}",
                    i + 1,
                    entry.path,
                    entry.score,
                    u8::from(entry.hf_matched),
                    rules
                );
            }
        }
        OutputFormat::Json => {
            let report = JsonReport {
                alpha: ranked.alpha,
                top,
                entries: shown
                    .iter()
                    .enumerate()
                    .map(|(i, entry)| JsonEntry {
                        rank: i + 1,
                        path: &entry.path,
                        score: round4(entry.score),
                        hf_matched: entry.hf_matched,
                        evidence: evidence
                            .get(entry.path.as_str())
                            .copied()
                            .unwrap_or(&[])
                            .iter()
                            .map(|(id, line)| JsonEvidence {
                                rule: rule_names.get(id).copied().unwrap_or("?"),
                                line: *line,
                            })
                            .collect(),
                    })
                    .collect(),
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(internal_error)?
            );
        }
    }
    Ok(())
}

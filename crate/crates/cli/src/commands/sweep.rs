//! `buildloc sweep`: evaluate the full pipeline across a grid of fusion
//! weights, sharing the per-package indexing work.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;

use buildloc_core::eval::{alpha_sweep, default_alpha_grid, load_manifest, EvalConfig, Variant};

use crate::settings::{resolve, resolve_format, FileSettings, OutputFormat, PipelineFlags};
use crate::{input_error, internal_error, CliResult};

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Dataset manifest: one JSON object per line
    #[arg(long)]
    pub manifest: PathBuf,

    /// Comma-separated weights to sweep (default: 0.1 through 0.9)
    #[arg(long)]
    pub alphas: Option<String>,

    /// Output format
    #[arg(long, env = "BUILDLOC_FORMAT", value_parser = ["tsv", "json"])]
    pub format: Option<String>,

    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

fn parse_alphas(raw: &str) -> Result<Vec<f64>, crate::CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| input_error(anyhow!("invalid alpha {s:?} in --alphas")))
        })
        .collect()
}

pub fn run(args: SweepArgs, file: &FileSettings) -> CliResult {
    let resolved = resolve(&args.pipeline, file)?;
    let format = resolve_format(args.format.as_deref(), file)?;
    let alphas = match &args.alphas {
        Some(raw) => parse_alphas(raw)?,
        None => default_alpha_grid(),
    };

    let entries = load_manifest(&args.manifest).map_err(input_error)?;
    if entries.is_empty() {
        return Err(input_error(anyhow!(
            "manifest {} has no entries",
            args.manifest.display()
        )));
    }

    let config = EvalConfig {
        variant: Variant::Full,
        alpha: resolved.alpha,
        ingest: resolved.ingest,
        pipeline: resolved.pipeline,
    };
    let rows = alpha_sweep(&entries, &config, &alphas)
        .context("sweep failed")
        .map_err(input_error)?;

    match format {
        OutputFormat::Tsv => {
            println!("alpha\tA@10\tP@10\tR@10\tMAP");
            for row in &rows {
                println!(
                    "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                    row.alpha, row.accuracy_at_10, row.precision_at_10, row.recall_at_10, row.map
                );
            }
        }
        OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&rows).map_err(internal_error)?
            );
        }
    }
    Ok(())
}

//! `buildloc eval`: run one pipeline variant over a dataset manifest and
//! report per-package and aggregate metrics.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;

use buildloc_core::eval::{
    evaluate_dataset, load_manifest, EvalConfig, EvalReport, Variant,
};

use crate::settings::{resolve, resolve_format, FileSettings, OutputFormat, PipelineFlags};
use crate::{input_error, internal_error, CliResult};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Dataset manifest: one JSON object per line
    #[arg(long)]
    pub manifest: PathBuf,

    /// Pipeline variant to evaluate
    #[arg(long, env = "BUILDLOC_VARIANT", value_parser = ["hf", "fr", "fr+qa", "full"])]
    pub variant: Option<String>,

    /// Output format for stdout
    #[arg(long, env = "BUILDLOC_FORMAT", value_parser = ["tsv", "json"])]
    pub format: Option<String>,

    /// Directory to write report.tsv and report.json into
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

pub fn resolve_variant(
    flag: Option<&str>,
    file: &FileSettings,
) -> Result<Variant, crate::CliError> {
    match flag.or(file.variant.as_deref()) {
        None => Ok(Variant::Full),
        Some(s) => s.parse::<Variant>().map_err(|e| input_error(anyhow!(e))),
    }
}

pub fn render_report_tsv(report: &EvalReport) -> String {
    let mut out = String::from(
        "package\tA@1\tA@5\tA@10\tP@1\tP@5\tP@10\tR@1\tR@5\tR@10\tAP\n",
    );
    let mut row = |name: &str, m: &buildloc_core::eval::PackageMetrics| {
        out.push_str(&format!(
            "{name}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\n",
            m.accuracy[0],
            m.accuracy[1],
            m.accuracy[2],
            m.precision[0],
            m.precision[1],
            m.precision[2],
            m.recall[0],
            m.recall[1],
            m.recall[2],
            m.avg_precision,
        ));
    };
    for (id, metrics) in &report.per_package {
        row(id, metrics);
    }
    row("ALL", &report.aggregate);
    out
}

pub fn run(args: EvalArgs, file: &FileSettings) -> CliResult {
    let resolved = resolve(&args.pipeline, file)?;
    let format = resolve_format(args.format.as_deref(), file)?;
    let variant = resolve_variant(args.variant.as_deref(), file)?;

    let entries = load_manifest(&args.manifest).map_err(input_error)?;
    if entries.is_empty() {
        return Err(input_error(anyhow!(
            "manifest {} has no entries",
            args.manifest.display()
        )));
    }

    let config = EvalConfig {
        variant,
        alpha: resolved.alpha,
        ingest: resolved.ingest,
        pipeline: resolved.pipeline,
    };
    let report = evaluate_dataset(&entries, &config);
    for (id, reason) in &report.failures {
        log::warn!("package {id} excluded: {reason}");
    }
    if report.n_packages == 0 {
        return Err(input_error(anyhow!("every package in the manifest failed")));
    }

    let tsv = render_report_tsv(&report);
    let json = serde_json::to_string_pretty(&report).map_err(internal_error)?;
    match format {
        OutputFormat::Tsv => print!("{tsv}"),
        OutputFormat::Json => println!("{json}"),
    }

    if let Some(out_dir) = &args.out {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("failed to create {}", out_dir.display()))
            .map_err(input_error)?;
        std::fs::write(out_dir.join("report.tsv"), &tsv)
            .context("failed to write report.tsv")
            .map_err(internal_error)?;
        std::fs::write(out_dir.join("report.json"), json.as_bytes())
            .context("failed to write report.json")
            .map_err(internal_error)?;
    }
    Ok(())
}

//! `buildloc rules`: print the rule table or scan one file for hits.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand};

use buildloc_core::rules::scan_text;

use crate::settings::{resolve_rules, FileSettings};
use crate::{input_error, CliResult};

#[derive(Subcommand, Debug)]
pub enum RulesCommand {
    /// Print the rule table (built-ins plus any custom rules)
    List(ListArgs),

    /// Scan a file and print every line that matches a rule
    Check(CheckArgs),
}

#[derive(Args, Debug)]
pub struct ListArgs {
    /// TOML file with additional rules (ids >= 100)
    #[arg(long, env = "BUILDLOC_RULES_FILE")]
    pub rules_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// File to scan
    pub path: PathBuf,

    /// TOML file with additional rules (ids >= 100)
    #[arg(long, env = "BUILDLOC_RULES_FILE")]
    pub rules_file: Option<PathBuf>,
}

pub fn run(cmd: RulesCommand, file: &FileSettings) -> CliResult {
    match cmd {
        RulesCommand::List(args) => {
            let rules = resolve_rules(
                args.rules_file.as_deref().or(file.rules_file.as_deref()),
            )?;
            println!("id\tname\tpattern\tdescription");
            for rule in &rules {
                println!(
                    "{}\t{}\t{}\t{}",
                    rule.id, rule.name, rule.pattern, rule.description
                );
            }
            Ok(())
        }
        RulesCommand::Check(args) => {
            let rules = resolve_rules(
                args.rules_file.as_deref().or(file.rules_file.as_deref()),
            )?;
            let raw = std::fs::read(&args.path)
                .with_context(|| format!("failed to read {}", args.path.display()))
                .map_err(input_error)?;
            let text = String::from_utf8_lossy(&raw);
            let lines: Vec<&str> = text.lines().collect();
            println!("line\trule\ttext");
            for (rule_id, line_no) in scan_text(&text, &rules) {
                let name = rules
                    .iter()
                    .find(|r| r.id == rule_id)
                    .map(|r| r.name.as_str())
                    .unwrap_or("?");
                println!("{line_no}\t{name}\t{}", lines[line_no - 1]);
            }
            Ok(())
        }
    }
}

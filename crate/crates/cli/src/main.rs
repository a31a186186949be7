//! `buildloc`: rank the source files most likely responsible for an
//! unreproducible build, evaluate the pipeline over labeled datasets, and
//! inspect the heuristic rule set.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit code for unusable inputs (missing paths, bad flags, empty corpus).
pub const EXIT_INPUT: u8 = 2;
/// Exit code for internal failures.
pub const EXIT_INTERNAL: u8 = 1;

#[derive(Debug)]
pub enum CliError {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &anyhow::Error {
        match self {
            Self::Input(e) | Self::Internal(e) => e,
        }
    }
}

pub type CliResult = Result<(), CliError>;

pub fn input_error(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Input(err.into())
}

pub fn internal_error(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(err.into())
}

#[derive(Parser, Debug)]
#[command(
    name = "buildloc",
    version,
    about = "Locate the source files responsible for unreproducible builds"
)]
struct Cli {
    /// TOML config file; flags and environment variables take precedence
    #[arg(long, global = true, env = "BUILDLOC_CONFIG")]
    config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank a package's source files against its diff log and build log
    Locate(commands::locate::LocateArgs),

    /// Evaluate the pipeline over a dataset manifest
    Eval(commands::eval::EvalArgs),

    /// Sweep the fusion weight alpha over a dataset manifest
    Sweep(commands::sweep::SweepArgs),

    /// Inspect the heuristic rules or scan a single file
    #[command(subcommand)]
    Rules(commands::rules::RulesCommand),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::from_env(env_logger::Env::default())
        .filter_level(level)
        .init();

    let file_settings = match settings::load_file(cli.config.as_deref()) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("error: {:#}", err.message());
            return ExitCode::from(err.exit_code());
        }
    };

    let result = match cli.command {
        Command::Locate(args) => commands::locate::run(args, &file_settings),
        Command::Eval(args) => commands::eval::run(args, &file_settings),
        Command::Sweep(args) => commands::sweep::run(args, &file_settings),
        Command::Rules(cmd) => commands::rules::run(cmd, &file_settings),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {:#}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

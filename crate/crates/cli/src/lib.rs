//! Command-line front end: ingest, train, recommend, evaluate and synth.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use error::{CliError, CliResult};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "pharmarec", version, about = "Drug recommendation with a knowledge-based safety filter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate the configured data; print a JSON report.
    Ingest {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train the pipeline and write the artifact directory.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-N recommendations for one patient.
    Recommend {
        #[arg(long)]
        artifacts: PathBuf,
        /// Patient query as JSON.
        #[arg(long)]
        patient: PathBuf,
        #[arg(short = 'n', long, default_value_t = 10)]
        n: usize,
        /// Skip the knowledge-base filter.
        #[arg(long)]
        no_kb: bool,
        /// List removed drugs and the rules they broke.
        #[arg(long)]
        explain: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute the metric suite for a trained directory.
    Evaluate {
        #[arg(long)]
        artifacts: PathBuf,
        /// Run config whose `evaluation` section replaces the stored one.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a synthetic dataset as CSV tables.
    Synth {
        /// Run config with synthetic data, or a bare generator config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run_config(path: Option<&Path>, seed: Option<u64>, out: Option<PathBuf>) -> CliResult<RunConfig> {
    let base = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(base.with_overrides(seed, out))
}

pub fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Ingest { config, seed, report } => {
            let cfg = run_config(config.as_deref(), seed, None)?;
            let r = commands::ingest(&cfg)?;
            commands::write_output(report.as_deref(), &io::to_json(&r)?)?;
            Ok(if r.ok { 0 } else { 1 })
        }
        Command::Train { config, seed, out } => {
            let cfg = run_config(config.as_deref(), seed, out)?;
            let summary = commands::train(&cfg)?;
            print!("{}", io::to_json(&summary)?);
            Ok(0)
        }
        Command::Recommend {
            artifacts,
            patient,
            n,
            no_kb,
            explain,
            format,
            output,
        } => {
            if n == 0 {
                return Err(CliError::Invalid("-n must be at least 1".into()));
            }
            let query = commands::read_patient(&patient)?;
            let outcome = commands::recommend(&artifacts, &query, n, !no_kb)?;
            let text = match format {
                Format::Table => commands::render_table(&outcome, explain),
                Format::Json => commands::render_json(&outcome, explain)?,
            };
            commands::write_output(output.as_deref(), &text)?;
            Ok(0)
        }
        Command::Evaluate { artifacts, config } => {
            let eval = match config {
                Some(p) => Some(RunConfig::load(&p)?.evaluation),
                None => None,
            };
            let report = commands::evaluate(&artifacts, eval)?;
            print!("{}", io::to_json(&report)?);
            Ok(0)
        }
        Command::Synth { config, seed, out } => {
            let synthetic = commands::synthetic_config(config.as_deref())?;
            let master = match (seed, config.as_deref().map(RunConfig::load)) {
                (Some(s), _) => s,
                (None, Some(Ok(run))) => run.master_seed,
                _ => 0,
            };
            let report = commands::synth(&out, &synthetic, master)?;
            print!("{}", io::to_json(&report)?);
            Ok(if report.is_ok() { 0 } else { 1 })
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

mod audit;
mod config;
mod input;
mod probe;
mod single;

/// Exit status: 0 success, 1 usage error, 2 runtime error, 3 flaws found
/// under --fail-on-flaw.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

pub fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

pub type Outcome = Result<ExitCode, Failure>;

#[derive(Debug, Parser)]
#[command(name = "tsaudit", version, about = "Audit time series anomaly detection benchmarks")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0, value_name = "S")]
    seed: u64,

    /// key=value file whose keys mirror the long flags; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every flaw analysis over a labeled corpus.
    Audit(audit::AuditArgs),
    /// Evaluate or search one-liner detectors on a single series.
    Oneliner(single::OnelinerArgs),
    /// Compute the discord score trace of a series.
    Discord(single::DiscordArgs),
    /// Score per-series location predictions against UCR-style labels.
    Score(single::ScoreArgs),
    /// Insert a synthetic anomaly into a series.
    Inject(single::InjectArgs),
    /// Check whether a detector's peak survives perturbations.
    Probe(probe::ProbeArgs),
}

fn parse(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(&args)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let Some(path) = &cli.config else {
        return Ok(cli);
    };
    let extra =
        config::expand(path, &matches).map_err(|e| Cli::command().error(clap::error::ErrorKind::InvalidValue, e))?;
    if extra.is_empty() {
        return Ok(cli);
    }
    let mut merged = args;
    merged.extend(extra);
    let matches = Cli::command().try_get_matches_from(merged)?;
    Cli::from_arg_matches(&matches)
}

fn run(cli: Cli) -> Outcome {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage(anyhow::anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(runtime)?;
    }
    match cli.command {
        Command::Audit(a) => audit::run(a, cli.seed),
        Command::Oneliner(a) => single::oneliner(a),
        Command::Discord(a) => single::discord(a),
        Command::Score(a) => single::score(a),
        Command::Inject(a) => single::inject(a, cli.seed),
        Command::Probe(a) => probe::run(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

//! `levels`: validate `.sol` structures, query probabilities and run seeded
//! simulations.
//!
//! Exit codes: 0 success, 2 domain error, 3 I/O error, 4 usage error.
//! Reports go to standard output, diagnostics to standard error.

mod commands;
mod manifest;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use levels_core::ProbabilityValue;

#[derive(Debug, Parser)]
#[command(name = "levels", version, about = "Structure-of-levels event toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
struct RunOpts {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the simulation (0 = all cores). Never changes output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a file, printing each structure's classification.
    Validate {
        /// Path to a .sol file, or builtin:NAME.
        file: String,
    },
    /// Probability of a relationship or a denoted outcome.
    Prob {
        file: String,
        /// Element name, optionally qualified as STRUCTURE.NAME.
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Both chord dynamics on the same number of trials.
    Bertrand {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Relative frequencies of the members of an alternative group.
    Simulate {
        file: String,
        #[arg(long)]
        group: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Mean |F_s - p| over replications for ascending sample sizes.
    Converge {
        #[arg(long, value_parser = parse_probability)]
        p: ProbabilityValue,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        #[arg(long)]
        reps: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Re-run the command recorded in a report's manifest.
    Rerun {
        /// A CSV or JSON report produced by this tool.
        report: String,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Print an embedded example structure.
    Builtin {
        /// One of: coin, dice, bertrand-pair, decision, gravitation.
        name: String,
    },
}

fn parse_probability(text: &str) -> Result<ProbabilityValue, String> {
    text.parse().map_err(|e: levels_core::Error| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Io(String),
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
            CliError::Usage(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Io(m) | CliError::Usage(m) => m,
        }
    }
}

impl From<levels_core::Error> for CliError {
    fn from(err: levels_core::Error) -> Self {
        match err {
            levels_core::Error::InvalidArgument(_) => CliError::Usage(err.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

/// Parses `args` (without the program name) and produces the report text.
fn run(args: Vec<String>) -> Result<String, CliError> {
    let cli = match Cli::try_parse_from(std::iter::once("levels".to_string()).chain(args)) {
        Ok(cli) => cli,
        Err(err) if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(err.to_string());
        }
        Err(err) => return Err(CliError::Usage(err.to_string())),
    };
    match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Prob {
            file,
            target,
            format,
        } => commands::prob(&file, &target, format),
        Command::Bertrand {
            trials,
            format,
            run,
        } => commands::bertrand(trials, format, run.seed, run.workers),
        Command::Simulate {
            file,
            group,
            trials,
            format,
            run,
        } => commands::simulate(&file, &group, trials, format, run.seed, run.workers),
        Command::Converge {
            p,
            sizes,
            reps,
            format,
            run,
        } => commands::converge(&p, &sizes, reps, format, run.seed, run.workers),
        Command::Rerun { report, workers } => {
            let text = commands::read_source(&report)?;
            let manifest = manifest::RunManifest::from_report(&text)
                .ok_or_else(|| CliError::Domain(format!("{report}: no run manifest found")))?;
            let mut args = manifest.to_args();
            let simulates = matches!(manifest.command.as_str(), "bertrand" | "simulate" | "converge");
            if workers != 0 && simulates {
                args.push("--workers".into());
                args.push(workers.to_string());
            }
            run(args)
        }
        Command::Builtin { name } => levels_core::builtin::source(&name)
            .map(str::to_string)
            .ok_or_else(|| CliError::Usage(format!("no builtin example named {name:?}"))),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().skip(1).collect()) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let message = err.message().trim_end();
            eprintln!("{message}");
            ExitCode::from(err.exit_code())
        }
    }
}

//! `skyroute` command-line interface.

mod bench_table;
mod commands;
pub mod svg;

pub use bench_table::{bench_csv, bench_text_table, emit_bench_table};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

/// Exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Usage = 1,
    Input = 2,
    Infeasible = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::Input(_) => ExitCode::Input,
            CliError::Infeasible(_) => ExitCode::Infeasible,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "skyroute", version, about = "UAV delivery route optimization under ISC3 constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded random instance.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        stations: usize,
        /// Side of the square area, km.
        #[arg(long, default_value_t = 30.0)]
        area: f64,
        #[arg(long, default_value_t = 5)]
        base_stations: usize,
        #[arg(long, default_value_t = 1)]
        demand_min: u32,
        #[arg(long, default_value_t = 5)]
        demand_max: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve an instance with one metaheuristic.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// ISC3 demands JSON; case-study defaults when absent.
        #[arg(long)]
        demands: Option<PathBuf>,
        /// Solver config JSON; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Solve on an edge server at host:port.
        #[arg(long)]
        edge: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check a plan against the ISC3 demands.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        /// Route plan JSON, or a solve result whose best plan is checked.
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        demands: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run all four solvers and tabulate the results.
    Bench {
        /// Instance file; the canonical generated instance when absent.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        demands: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the five-step pipeline from a run config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        edge: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the telemetry log as CSV.
        #[arg(long)]
        telemetry: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Serve remote solves over TCP until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
    },
    /// Draw an instance and optionally a plan as SVG.
    Render {
        #[arg(long)]
        instance: PathBuf,
        /// Route plan JSON or solve result.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        demands: Option<PathBuf>,
        /// Canvas width and height in pixels.
        #[arg(long, default_value_t = 800, value_parser = clap::value_parser!(u32).range(100..))]
        size: u32,
        #[arg(long)]
        no_coverage: bool,
        #[arg(long)]
        no_labels: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("ISC3_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::Usage as i32 } else { ExitCode::Ok as i32 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            eprintln!("skyroute: {e}");
            e.exit_code() as i32
        }
    }
}

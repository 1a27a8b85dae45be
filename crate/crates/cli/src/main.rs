//! `pcheeger`: batch front end for spectral gaps, Cheeger constants and
//! eigenvalue brackets on weighted graphs.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O error, 4 an unconverged
//! solver run under `--strict`.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commands::{CliError, CliResult, Outcome};
use report::{envelope, validate_report, RunManifest, SCHEMA_VERSION};

#[derive(Debug, Parser, Serialize)]
#[command(name = "pcheeger", version, about = "p-Laplacian gaps, Cheeger constants and eigenvalue brackets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Root of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Exit with code 4 when a solver run does not converge.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Parse a graph and summarize it.
    Validate(commands::ValidateArgs),
    /// Edge lengths, their R_p membership certificate and delta.
    Metric(commands::MetricCmdArgs),
    /// Isoperimetric constant h1 or Dirichlet h0.
    Cheeger(commands::CheegerArgs),
    /// Nonlinear eigenvalue estimate with its Cheeger/Buser bracket.
    Eigen(commands::EigenArgs),
    /// Gap estimates and brackets along a decreasing grid of exponents.
    Sweep(commands::SweepArgs),
    /// Full two-sided bound report with inequality verdicts.
    Bounds(commands::BoundsArgs),
    /// Volume growth and Dirichlet eigenvalues on growing truncations.
    Brooks(commands::BrooksArgs),
    /// Bipartition from the sign pattern of the gap minimizer.
    Partition(commands::PartitionArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Metric(_) => "metric",
            Command::Cheeger(_) => "cheeger",
            Command::Eigen(_) => "eigen",
            Command::Sweep(_) => "sweep",
            Command::Bounds(_) => "bounds",
            Command::Brooks(_) => "brooks",
            Command::Partition(_) => "partition",
        }
    }

    fn run(&self, seed: u64) -> CliResult<Outcome> {
        match self {
            Command::Validate(a) => commands::validate(a),
            Command::Metric(a) => commands::metric(a),
            Command::Cheeger(a) => commands::cheeger(a, seed),
            Command::Eigen(a) => commands::eigen(a, seed),
            Command::Sweep(a) => commands::sweep(a, seed),
            Command::Bounds(a) => commands::bounds(a, seed),
            Command::Brooks(a) => commands::brooks(a, seed),
            Command::Partition(a) => commands::partition_cmd(a, seed),
        }
    }
}

fn execute(cli: &Cli) -> CliResult<bool> {
    let started = Instant::now();
    let outcome = match cli.global.threads {
        Some(0) => return Err(CliError::Invalid("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?
            .install(|| cli.command.run(cli.global.seed))?,
        None => cli.command.run(cli.global.seed)?,
    };
    let text = match cli.global.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => {
            let manifest = RunManifest {
                command: cli.command.name().into(),
                inputs: outcome.inputs.clone(),
                flags: serde_json::to_value(cli).expect("flags serialize"),
                seed: cli.global.seed,
                tool_version: env!("CARGO_PKG_VERSION"),
                schema_version: SCHEMA_VERSION,
                wall_time_ms: started.elapsed().as_millis() as u64,
            };
            let report = envelope(&manifest, &outcome.result);
            validate_report(&report).map_err(|e| CliError::Invalid(format!("report: {e}")))?;
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match &cli.global.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?,
    }
    Ok(outcome.converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if cli.global.strict => {
            eprintln!("error: solver did not converge");
            ExitCode::from(4)
        }
        Ok(false) => {
            eprintln!("warning: solver did not converge; estimates are upper bounds only");
            ExitCode::SUCCESS
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

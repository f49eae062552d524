//! `opwire`: validate, compose, simulate and check wiring-diagram models.
//!
//! Exit codes: 0 when the command succeeds or the checked property holds,
//! 1 when the property is violated, 2 for input errors.

mod commands;
mod traces;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opwire::Limits;

#[derive(Parser)]
#[command(name = "opwire", version, about = "Compositional wiring-diagram models")]
struct Cli {
    /// Cap on enumerated state, trace and witness counts.
    #[arg(long, global = true, env = "OPWIRE_MAX_ENUM", default_value_t = opwire::exec::DEFAULT_MAX_ENUM)]
    max_enum: u64,

    /// Disable data-parallel enumeration.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model file.
    Validate { file: PathBuf },
    /// Print the flattened model, with provenance in its metadata.
    Flatten { file: PathBuf },
    /// Simulate the composite behavior on a CSV input trace.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        inputs: PathBuf,
        /// Number of steps; a shorter trace repeats its last row.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Print the composite contract of the root diagram.
    ComposeContracts { file: PathBuf },
    /// Check every stored contract against its box's behavior.
    Check {
        file: PathBuf,
        /// Run length for single-step contracts.
        #[arg(long, default_value_t = 3)]
        horizon: usize,
    },
    /// Compare alpha of the composite with the composite of alphas.
    CheckNaturality {
        file: PathBuf,
        #[arg(long)]
        horizon: usize,
    },
    /// Check a refined box against its implementation.
    CheckRefinement {
        file: PathBuf,
        /// Slash-separated path of the refined box.
        #[arg(long = "box")]
        path: String,
        /// Moore horizon; defaults to the state-count product plus one.
        #[arg(long)]
        horizon: Option<usize>,
        /// LTI Markov-parameter tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Render the root (or flattened) diagram as Graphviz DOT.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        flat: bool,
    },
    /// Re-serialize a model file canonically.
    Fmt { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = Limits::default()
        .with_max_enum(cli.max_enum)
        .with_parallel(!cli.sequential);
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Flatten { file } => commands::flatten(&file),
        Command::Simulate { file, inputs, horizon } => commands::simulate(&file, &inputs, horizon, &limits),
        Command::ComposeContracts { file } => commands::compose_contracts(&file, &limits),
        Command::Check { file, horizon } => commands::check(&file, horizon, &limits),
        Command::CheckNaturality { file, horizon } => commands::check_naturality(&file, horizon, &limits),
        Command::CheckRefinement { file, path, horizon, tol } => {
            commands::check_refinement(&file, &path, horizon, tol, &limits)
        }
        Command::ExportDot { file, flat } => commands::export_dot(&file, flat),
        Command::Fmt { file } => commands::fmt(&file),
    };
    match result {
        Ok(report) => {
            print!("{}", report.stdout);
            ExitCode::from(report.code)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

//! Batch front end: scenario files in, CSV or JSON results out.
//!
//! Exit codes: 0 success, 1 schema/usage error (with field diagnostics),
//! 2 numeric-domain error (library message verbatim).

mod output;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Rendered;
use runner::{CliError, ProbMode};

#[derive(Parser)]
#[command(
    name = "relqm",
    about = "Relational probability-amplitude toolkit: probabilities, entanglement, evolution and lattice path integrals over scenario files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct CommonFlags {
    /// Scenario file (JSON; a previous JSON output is accepted too)
    #[arg(long)]
    scenario: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's hbar
    #[arg(long)]
    hbar: Option<f64>,
    /// Entanglement gate tolerance for coherent/transition probabilities
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Probability of an outcome under the selected counting rule
    Prob {
        #[command(flatten)]
        common: CommonFlags,
        /// coherent | incoherent | joint | transition
        #[arg(long, value_enum)]
        mode: ProbMode,
        /// System outcome indices (comma separated)
        #[arg(long, value_delimiter = ',')]
        outcome: Vec<usize>,
        /// Apparatus index for joint mode
        #[arg(long)]
        apparatus_index: Option<usize>,
        /// Target-matrix scenario for transition mode
        #[arg(long)]
        scenario_b: Option<PathBuf>,
    },
    /// Entanglement entropy of the scenario matrix
    Entropy {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Schmidt decomposition of the scenario matrix
    Schmidt {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Evolve the matrix under the scenario Hamiltonians over the times list
    Evolve {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Lattice path-integral kernel, relational matrix and density block
    Pathint {
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Schema(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let (common, rendered, scen) = match command {
        Command::Prob {
            common,
            mode,
            outcome,
            apparatus_index,
            scenario_b,
        } => {
            let scen = scenario::load(&common.scenario).map_err(CliError::Schema)?;
            let scen_b = match &scenario_b {
                Some(path) => Some(scenario::load(path).map_err(CliError::Schema)?),
                None => None,
            };
            let result = runner::run_prob(
                &scen,
                scen_b.as_ref(),
                mode,
                &outcome,
                apparatus_index,
                common.tol,
            )?;
            (common, Rendered::Prob(result), scen)
        }
        Command::Entropy { common } => {
            let scen = scenario::load(&common.scenario).map_err(CliError::Schema)?;
            let result = runner::run_entropy(&scen)?;
            (common, Rendered::Entropy(result), scen)
        }
        Command::Schmidt { common } => {
            let scen = scenario::load(&common.scenario).map_err(CliError::Schema)?;
            let result = runner::run_schmidt(&scen)?;
            (common, Rendered::Schmidt(result), scen)
        }
        Command::Evolve { common } => {
            let scen = scenario::load(&common.scenario).map_err(CliError::Schema)?;
            let result = runner::run_evolve(&scen, common.hbar)?;
            (common, Rendered::Evolve(result), scen)
        }
        Command::Pathint { common } => {
            let scen = scenario::load(&common.scenario).map_err(CliError::Schema)?;
            let result = runner::run_pathint(&scen, common.hbar)?;
            (common, Rendered::Pathint(result), scen)
        }
    };

    let text = match common.format {
        Format::Csv => rendered.to_csv(),
        Format::Json => rendered.to_json(&scen),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Schema(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

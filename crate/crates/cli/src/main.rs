mod commands;
mod errors;
mod io;
mod report;

use clap::{Parser, Subcommand};

use commands::{cmd_analyze, cmd_evolve, cmd_simulate, cmd_sweep};
use commands::{AnalyzeArgs, EvolveArgs, SimulateArgs, SweepArgs};

const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success
  2  invalid input (usage, parse, schema or invariant violations)
  3  incompatible or degenerate data (a transition probability is zero, a
     filtration outcome is empty, or an interference denominator vanishes)
  4  context is not trigonometric and --allow-hyperbolic was not given
  5  I/O failure

On failure, stderr carries a human-readable line followed by a
machine-readable JSON error object.";

#[derive(Parser)]
#[command(
    name = "qlstat",
    version,
    about = "Interference analysis of contextual probability data for two dichotomous \
             observables: classification, state reconstruction, simulation and dynamics",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze counts or probabilities: interference coefficients,
    /// classification, amplitudes, operators and Bloch vector.
    Analyze(AnalyzeArgs),
    /// Run the hidden-variable simulator for a spec and analyze its counts.
    Simulate(SimulateArgs),
    /// Evolve a complex state under a Hamiltonian and sample the trajectory.
    Evolve(EvolveArgs),
    /// Tabulate the interference curve over a phase or marginal grid as CSV.
    Sweep(SweepArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    if let Err(err) = result {
        err.emit();
        std::process::exit(err.code);
    }
}

//! `spinqrf`: change of quantum reference frame for spin from the command line.

mod commands;
mod error;
mod json;
mod statefile;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{ExampleParams, Output, SymmetryArgs};
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "spinqrf", version, about = "Quantum reference frames for spin")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress warnings.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Change perspective to the described frame.
    Transform {
        input: PathBuf,
        output: PathBuf,
        /// Also compare with the finite-spin transformation at this j.
        #[arg(long)]
        finite_j: Option<f64>,
    },
    /// Reproduce a worked example (a: rotated, b: superposed, c: entangled).
    Example {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        phi: f64,
        /// Relative phase of the second branch (b, c).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phase: f64,
        /// Euler angles alpha,beta,gamma of the frame (a).
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            default_values_t = [0.3, 1.1, -0.7]
        )]
        euler: Vec<f64>,
    },
    /// Tabulate finite-j Euler angle operators against their classical values.
    Converge {
        #[arg(long, value_delimiter = ',', required = true)]
        j: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// JSON file with frame rows; defaults to {e1, e3, -e2}.
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// Check invariance of a Heisenberg-like Hamiltonian over random trials.
    Symmetry {
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, hide = true)]
        break_invariance: bool,
    },
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Transform {
            input,
            output,
            finite_j,
        } => commands::transform(input, output, *finite_j),
        Command::Example {
            name,
            theta,
            phi,
            phase,
            euler,
        } => {
            let [alpha, beta, gamma] = euler[..] else {
                return Err(CliError::Input(format!(
                    "--euler needs three angles, found {}",
                    euler.len()
                )));
            };
            let params = ExampleParams {
                theta: *theta,
                phi: *phi,
                phase: *phase,
                euler: [alpha, beta, gamma],
            };
            commands::example(name, &params, cli.format)
        }
        Command::Converge {
            j,
            theta,
            phi,
            frame,
        } => commands::converge(j, *theta, *phi, frame.as_deref(), cli.format),
        Command::Symmetry {
            j,
            s,
            trials,
            break_invariance,
        } => commands::symmetry(
            &SymmetryArgs {
                j: *j,
                s: *s,
                trials: *trials,
                seed: cli.seed,
                break_invariance: *break_invariance,
            },
            cli.format,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if !cli.quiet {
                for w in &out.warnings {
                    eprintln!("warning: {w}");
                }
            }
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
            match out.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::process::ExitCode;

use chbound_cli::{cmd_bounds, cmd_compare, cmd_delta, cmd_lhv, cmd_scan, CliError, Format, OutputRecord};
use clap::{Parser, Subcommand};

const EXIT_CERTIFICATION_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Detector-efficiency bounds for n-site Clauser-Horne inequalities.
#[derive(Debug, Parser)]
#[command(name = "chbound", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Eigenvalue tolerance for classifying a violation.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical efficiency n/(2n-1) for n = 2..=N.
    Bounds {
        /// Largest site count (2..=64).
        #[arg(long = "n")]
        n_max: usize,
    },
    /// Probability structure and critical efficiency of the delta state.
    Delta {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
    },
    /// Certify the n-site inequality against every deterministic strategy.
    Lhv {
        #[arg(long)]
        n: usize,
        /// Comma-separated efficiencies.
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        eta: Vec<f64>,
    },
    /// Top eigenvalue of the measurement operator across an efficiency range.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eta_min: f64,
        #[arg(long)]
        eta_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Best delta-state violation as a fraction of the eigenvector violation.
    Compare {
        #[arg(long)]
        n: usize,
        /// Comma-separated efficiencies; defaults to critical+0.02 .. 0.95 in steps of 0.01.
        #[arg(long, value_delimiter = ',')]
        eta: Option<Vec<f64>>,
    },
}

fn run(cli: &Cli) -> Result<(OutputRecord, bool), CliError> {
    Ok(match &cli.command {
        Command::Bounds { n_max } => (cmd_bounds(*n_max)?, true),
        Command::Delta { n, epsilon } => (cmd_delta(*n, *epsilon)?, true),
        Command::Lhv { n, eta } => {
            let out = cmd_lhv(*n, eta)?;
            (out.record, out.certified)
        }
        Command::Scan {
            n,
            eta_min,
            eta_max,
            steps,
        } => (cmd_scan(*n, *eta_min, *eta_max, *steps, cli.tol)?, true),
        Command::Compare { n, eta } => (cmd_compare(*n, eta.as_deref())?, true),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((record, ok)) => {
            let text = record.render(cli.format);
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CERTIFICATION_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

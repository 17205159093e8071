mod angle;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use angle::parse_angle;

#[derive(Parser)]
#[command(
    name = "qutrit-selftest",
    version,
    about = "Verify sum-of-squares certificates, classical bounds and self-testing for (2,2,3) Bell inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the sum-of-squares identity on seeded random realizations.
    VerifySos(VerifySosArgs),
    /// Compare the enumerated classical bound with the closed form.
    Classical(ClassicalArgs),
    /// Tabulate the classical bound along the family.
    Sweep(SweepArgs),
    /// Run the full self-testing pipeline at one family point.
    Certify(CertifyArgs),
    /// Test genuine incompatibility of (Z, T3) for a given kappa.
    Incompat(IncompatArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct OutputArgs {
    /// Output file; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
pub struct VerifySosArgs {
    /// theta_beta in radians, or pi/N, Mpi/N.
    #[arg(long, value_parser = parse_angle, conflicts_with = "coeffs")]
    theta_beta: Option<f64>,
    /// Explicit coefficients r_a,t_a,r_b,t_b,r_g,t_g,r_d,t_d in place of a family point.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol_sos: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct ClassicalArgs {
    #[arg(long, value_parser = parse_angle)]
    theta_beta: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_agreement: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_angle)]
    from: Option<f64>,
    #[arg(long, value_parser = parse_angle)]
    to: Option<f64>,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol_agreement: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct CertifyArgs {
    #[arg(long, value_parser = parse_angle)]
    theta_beta: f64,
    /// Also write the JSON report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol_nullifier: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_bell: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_spectral: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_shift: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct IncompatArgs {
    /// Argument of kappa, in radians or pi/N, Mpi/N.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    kappa_angle: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_shift: f64,
    #[command(flatten)]
    output: OutputArgs,
}

pub enum Failure {
    Usage(String),
    Verification(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::VerifySos(a) => commands::verify_sos(a),
        Command::Classical(a) => commands::classical(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Certify(a) => commands::certify(a),
        Command::Incompat(a) => commands::incompat(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
